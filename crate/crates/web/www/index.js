import init, { simulate_1d, motion_grid, vector_probe } from "./pkg/mopla_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

let sim = null;
let yRange = [0, 1];

function drawFrame(frame) {
  const canvas = $("sim-canvas");
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  if (!sim) return;
  const xs = sim.xs(frame);
  const us = sim.values(frame);
  const [lo, hi] = yRange;
  const px = (x) => 20 + ((x + 0.5) / 2.5) * (width - 40);
  const py = (u) => height - 20 - ((u - lo) / (hi - lo || 1)) * (height - 40);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath();
  ctx.moveTo(px(xs[0]), py(0));
  ctx.lineTo(px(xs[xs.length - 1]), py(0));
  ctx.stroke();
  ctx.strokeStyle = "#1b5e9e";
  ctx.lineWidth = 2;
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(px(x), py(us[i])) : ctx.moveTo(px(x), py(us[i]))));
  ctx.stroke();
  $("sim-time").textContent = `t = ${sim.times()[frame].toFixed(3)}`;
}

function runSimulation() {
  try {
    sim = simulate_1d(num("sim-p"), $("sim-kind").value, num("sim-a"), num("sim-omega"), num("sim-n"), 1.0, 120, 201);
  } catch (e) {
    sim = null;
    $("sim-info").textContent = String(e);
    drawFrame(0);
    return;
  }
  let lo = Infinity;
  let hi = -Infinity;
  for (let f = 0; f < sim.frame_count(); f++) {
    for (const u of sim.values(f)) {
      lo = Math.min(lo, u);
      hi = Math.max(hi, u);
    }
  }
  yRange = [Math.min(lo, 0), hi];
  const slider = $("sim-frame");
  slider.max = sim.frame_count() - 1;
  slider.value = 0;
  slider.disabled = false;
  $("sim-info").textContent =
    `mass identity residual   ${sim.mass_residual().toExponential(2)}\n` +
    `energy identity residual ${sim.energy_residual().toExponential(2)}`;
  drawFrame(0);
}

function drawGrid() {
  const canvas = $("grid-canvas");
  const ctx = canvas.getContext("2d");
  const n = 11;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  let pts;
  try {
    pts = motion_grid($("grid-kind").value, num("grid-a"), 1.0, num("grid-t"), n);
  } catch (e) {
    ctx.fillText(String(e), 10, 20);
    return;
  }
  const s = (v) => 60 + v * 200;
  const at = (i, j) => [s(pts[2 * (j * n + i)]), canvas.height - s(pts[2 * (j * n + i) + 1])];
  ctx.strokeStyle = "#444";
  for (let j = 0; j < n; j++) {
    ctx.beginPath();
    for (let i = 0; i < n; i++) {
      const [x, y] = at(i, j);
      i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    }
    ctx.stroke();
  }
  for (let i = 0; i < n; i++) {
    ctx.beginPath();
    for (let j = 0; j < n; j++) {
      const [x, y] = at(i, j);
      j ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    }
    ctx.stroke();
  }
}

function runProbe() {
  try {
    const [mono, slack, lip, ratio, c] = vector_probe(num("probe-p"), num("probe-n"), BigInt(num("probe-seed")));
    $("probe-out").textContent =
      `monotonicity violations ${mono} (min relative slack ${slack.toExponential(2)})\n` +
      `p-Lipschitz violations  ${lip} (max ratio ${ratio.toFixed(4)}, constant ${c.toFixed(4)})`;
  } catch (e) {
    $("probe-out").textContent = String(e);
  }
}

await init();
$("sim-run").addEventListener("click", runSimulation);
$("sim-frame").addEventListener("input", (e) => drawFrame(Number(e.target.value)));
for (const id of ["grid-kind", "grid-a", "grid-t"]) $(id).addEventListener("input", drawGrid);
$("probe-run").addEventListener("click", runProbe);
drawGrid();
runSimulation();
