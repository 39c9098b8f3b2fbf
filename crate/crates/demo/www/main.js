import init, { fidelity_sweep, purify_step, loss_estimate } from "./pkg/halfrgs_demo.js";

const COLORS = { raw: "#c0392b", baseline: "#2471a3", fig5: "#229954" };
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const list = (id) => $(id).value.split(",").map((s) => Number(s.trim()));

function guard(out, fn) {
  try {
    fn();
  } catch (e) {
    $(out).textContent = "error: " + (e.message ?? e);
  }
}

function plot(points) {
  const canvas = $("s-plot");
  const ctx = canvas.getContext("2d");
  const pad = { l: 60, r: 20, t: 20, b: 40 };
  const w = canvas.width - pad.l - pad.r;
  const h = canvas.height - pad.t - pad.b;
  ctx.clearRect(0, 0, canvas.width, canvas.height);

  const xs = points.map((p) => p.p_depol);
  const ys = points.map((p) => p.fidelity);
  const xmax = Math.max(...xs) || 1;
  const ymin = Math.min(0.5, ...ys);
  const X = (x) => pad.l + (x / xmax) * w;
  const Y = (y) => pad.t + (1 - (y - ymin) / (1 - ymin)) * h;

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  ctx.strokeRect(pad.l, pad.t, w, h);
  for (let i = 0; i <= 5; i++) {
    const y = ymin + ((1 - ymin) * i) / 5;
    ctx.fillText(y.toFixed(2), 8, Y(y) + 4);
    const x = (xmax * i) / 5;
    ctx.fillText(x.toPrecision(2), X(x) - 12, canvas.height - 18);
  }
  ctx.fillText("p_depol", pad.l + w / 2 - 20, canvas.height - 4);

  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(pad.l, Y(0.9));
  ctx.lineTo(pad.l + w, Y(0.9));
  ctx.stroke();
  ctx.setLineDash([]);

  for (const [name, color] of Object.entries(COLORS)) {
    const series = points.filter((p) => p.scenario === name);
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    series.forEach((p, i) => (i ? ctx.lineTo : ctx.moveTo).call(ctx, X(p.p_depol), Y(p.fidelity)));
    ctx.stroke();
  }
  $("s-legend").innerHTML = Object.entries(COLORS)
    .map(([n, c]) => `<span style="color:${c}">&#9632; ${n}</span>`)
    .join("");
}

function runSweep() {
  guard("s-out", () => {
    const points = JSON.parse(
      fidelity_sweep(num("s-pmax"), num("s-points"), num("s-eps"), num("s-hops"), num("s-rounds")),
    );
    plot(points);
    const last = points.slice(-3).map((p) => `${p.scenario}: F=${p.fidelity.toFixed(4)} rate=${p.rate.toExponential(3)}/s`);
    $("s-out").textContent = `at p = ${points.at(-1).p_depol}\n` + last.join("\n");
  });
}

function runPurify() {
  guard("p-out", () => {
    const r = JSON.parse(purify_step($("p-stab").value, list("p-keep"), list("p-sac")));
    $("p-out").textContent = JSON.stringify(r, null, 2);
  });
}

function runLoss() {
  guard("l-out", () => {
    const r = JSON.parse(
      loss_estimate(num("l-eta"), num("l-arms"), list("l-branch"), BigInt(num("l-samples")), BigInt(num("l-seed"))),
    );
    $("l-out").textContent = JSON.stringify(r, null, 2);
  });
}

await init();
$("s-run").onclick = runSweep;
$("p-run").onclick = runPurify;
$("l-run").onclick = runLoss;
runSweep();
