// Built with: wasm-bindgen --target web --out-dir www/pkg <tjunction_web.wasm>
import init, { floor_field, simulate, error_explorer } from "./pkg/tjunction_web.js";

const $ = (id) => document.getElementById(id);
const PRESETS = ["240-50-240", "240-60-240", "240-80-240", "240-100-240", "240-120-240", "240-150-240", "240-240-240"];
const COLORS = ["#1f77b4", "#d62728", "#999"];

function call(f, ...args) {
  const v = JSON.parse(f(...args));
  if (v.error) throw new Error(v.error);
  return v;
}

// World-to-canvas transform for the junction region (the waiting rooms are cropped).
function view(canvas, x0 = -8, x1 = 8, y0 = -1, y1 = 5.5) {
  const s = Math.min(canvas.width / (x1 - x0), canvas.height / (y1 - y0));
  return { s, px: (x) => (x - x0) * s, py: (y) => canvas.height - (y - y0) * s };
}

function drawWalls(ctx, v, geom) {
  ctx.fillStyle = "#444";
  ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  ctx.fillStyle = "#fff";
  for (const r of geom.walkable) {
    ctx.fillRect(v.px(r.min.x), v.py(r.max.y), (r.max.x - r.min.x) * v.s, (r.max.y - r.min.y) * v.s);
  }
  const o = geom.observation_area;
  ctx.strokeStyle = "#2a2";
  ctx.strokeRect(v.px(o.min.x), v.py(o.max.y), (o.max.x - o.min.x) * v.s, (o.max.y - o.min.y) * v.s);
}

function ramp(t) {
  t = Math.max(0, Math.min(1, t));
  return `rgb(${Math.round(255 * t)},${Math.round(255 * (1 - Math.abs(2 * t - 1)))},${Math.round(255 * (1 - t))})`;
}

function drawField() {
  const res = call(floor_field, $("preset").value, Number($("w").value));
  const c = $("field"), ctx = c.getContext("2d"), v = view(c);
  drawWalls(ctx, v, res.geometry);
  const f = res.field;
  let tmax = 0;
  for (const t of f.values) if (t !== null && t > tmax) tmax = t;
  for (let j = 0; j < f.ny; j++) {
    for (let i = 0; i < f.nx; i++) {
      const t = f.values[j * f.nx + i];
      if (t === null) continue;
      ctx.fillStyle = ramp(t / tmax);
      const x = f.x0 + i * f.h, y = f.y0 + (j + 1) * f.h;
      ctx.fillRect(v.px(x), v.py(y), f.h * v.s + 0.5, f.h * v.s + 0.5);
    }
  }
}

let sim = null;

function drawFrame() {
  if (!sim) return;
  const k = Number($("frame").value), fr = sim.frames[k];
  const c = $("sim"), ctx = c.getContext("2d"), v = view(c);
  drawWalls(ctx, v, sim.geometry);
  for (const [x, y, o] of fr.agents) {
    ctx.fillStyle = COLORS[o];
    ctx.beginPath();
    ctx.arc(v.px(x), v.py(y), 0.2 * v.s, 0, 2 * Math.PI);
    ctx.fill();
  }
  const hm = sim.heatmaps.find((h) => h.frame === fr.frame);
  const hc = $("heat"), hctx = hc.getContext("2d"), g = sim.grid;
  hctx.clearRect(0, 0, hc.width, hc.height);
  let label = "no one in the observation area";
  if (hm) {
    const vmax = Math.max(...hm.values, 1e-9), cw = hc.width / g.nx, ch = hc.height / g.ny;
    for (let j = 0; j < g.ny; j++) {
      for (let i = 0; i < g.nx; i++) {
        hctx.fillStyle = ramp(hm.values[j * g.nx + i] / vmax);
        hctx.fillRect(i * cw, hc.height - (j + 1) * ch, cw + 0.5, ch + 0.5);
      }
    }
    label = `left ${hm.left}, right ${hm.right}`;
  }
  $("fl").textContent = `frame ${fr.frame}: ${label}`;
}

function runSim() {
  $("status").textContent = "simulating...";
  setTimeout(() => {
    try {
      sim = call(simulate, $("preset").value, Number($("agents").value), Number($("split").value),
        BigInt($("seed").value), 2);
      $("frame").max = Math.max(0, sim.frames.length - 1);
      $("frame").value = Math.floor(sim.frames.length / 2);
      $("status").textContent = `${sim.frames.length} frames shown, ${sim.heatmaps.length} heatmaps, ${sim.unfinished} unfinished`;
      drawFrame();
    } catch (e) {
      $("status").textContent = e.message;
    }
  });
}

function explore() {
  $("status").textContent = "simulating and training...";
  setTimeout(() => {
    try {
      const r = call(error_explorer, $("preset").value, Number($("agents").value), Number($("runs").value),
        Number($("trees").value), BigInt($("seed").value));
      const c = $("scatter"), ctx = c.getContext("2d"), n = c.width;
      ctx.fillStyle = "#fff";
      ctx.fillRect(0, 0, n, n);
      ctx.strokeStyle = "#ccc";
      ctx.beginPath(); ctx.moveTo(0, n); ctx.lineTo(n, 0); ctx.stroke();
      for (const row of r.rows) {
        ctx.fillStyle = ramp(row.error / 50);
        ctx.fillRect(row.true_left / 100 * n - 2, n - row.pred_left / 100 * n - 2, 4, 4);
      }
      $("summary").textContent =
        `true (x) vs predicted (y) left share; ${r.train} train / ${r.test} test heatmaps, mean error ${r.mean_error.toFixed(1)}%`;
      $("status").textContent = "ready";
    } catch (e) {
      $("status").textContent = e.message;
    }
  });
}

await init();
for (const p of PRESETS) $("preset").add(new Option(p, p, false, p === "240-240-240"));
$("preset").onchange = () => { drawField(); sim = null; };
$("w").oninput = () => { $("wv").textContent = $("w").value; drawField(); };
$("run").onclick = runSim;
$("frame").oninput = drawFrame;
$("explore").onclick = explore;
drawField();
$("status").textContent = "ready";
