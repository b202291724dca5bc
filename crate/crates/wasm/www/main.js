import init, { skellam_vs_gaussian, randomness_curves, rate_vs_tau } from "./pkg/shotqrng_wasm.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

function num(id) {
  return Number(document.getElementById(id).value);
}

function fmt(x) {
  return Math.abs(x) >= 1e4 || (Math.abs(x) < 1e-3 && x !== 0) ? x.toExponential(3) : x.toPrecision(4);
}

// series: [{ xs, ys, color, bars }]
function plot(canvas, series, { logX = false, logY = false, xLabel = "", yLabel = "" } = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height;
  const pad = { l: 70, r: 15, t: 10, b: 40 };
  ctx.clearRect(0, 0, w, h);
  const tx = logX ? Math.log10 : (v) => v;
  const ty = logY ? Math.log10 : (v) => v;
  const pts = series.flatMap((s) => s.xs.map((x, i) => [tx(x), ty(s.ys[i])])).filter(([x, y]) => isFinite(x) && isFinite(y));
  if (pts.length === 0) return;
  let [x0, x1] = [Math.min(...pts.map((p) => p[0])), Math.max(...pts.map((p) => p[0]))];
  let [y0, y1] = [Math.min(...pts.map((p) => p[1])), Math.max(...pts.map((p) => p[1]))];
  if (!logY) y0 = Math.min(y0, 0);
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const X = (v) => pad.l + ((v - x0) / (x1 - x0)) * (w - pad.l - pad.r);
  const Y = (v) => h - pad.b - ((v - y0) / (y1 - y0)) * (h - pad.t - pad.b);

  ctx.strokeStyle = "#888";
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.beginPath();
  ctx.moveTo(pad.l, pad.t);
  ctx.lineTo(pad.l, h - pad.b);
  ctx.lineTo(w - pad.r, h - pad.b);
  ctx.stroke();
  for (let i = 0; i <= 4; i++) {
    const xv = x0 + ((x1 - x0) * i) / 4;
    const yv = y0 + ((y1 - y0) * i) / 4;
    ctx.fillText(fmt(logX ? 10 ** xv : xv), X(xv) - 20, h - pad.b + 15);
    ctx.fillText(fmt(logY ? 10 ** yv : yv), 5, Y(yv) + 4);
  }
  ctx.fillText(xLabel, w / 2, h - 5);
  ctx.save();
  ctx.translate(12, h / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(yLabel, 0, 0);
  ctx.restore();

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.fillStyle = s.color;
    if (s.bars) {
      const bw = Math.max(1, (X(tx(s.xs[1] ?? s.xs[0] + 1)) - X(tx(s.xs[0]))) * 0.8);
      s.xs.forEach((x, i) => {
        const top = Y(ty(s.ys[i]));
        ctx.fillRect(X(tx(x)) - bw / 2, top, bw, Y(y0) - top);
      });
      continue;
    }
    ctx.lineWidth = 2;
    ctx.beginPath();
    let started = false;
    s.xs.forEach((x, i) => {
      const px = tx(x), py = ty(s.ys[i]);
      if (!isFinite(px) || !isFinite(py)) return;
      if (started) ctx.lineTo(X(px), Y(py));
      else ctx.moveTo(X(px), Y(py));
      started = true;
    });
    ctx.stroke();
  }
}

function legend(id, entries) {
  document.getElementById(id).innerHTML = entries
    .map(([name, color]) => `<span style="color:${color}">&#9632; ${name}</span>`)
    .join("");
}

function guarded(statsId, fn) {
  const el = document.getElementById(statsId);
  try {
    el.classList.remove("error");
    fn(el);
  } catch (e) {
    el.classList.add("error");
    el.textContent = String(e.message ?? e);
  }
}

function drawGaussian() {
  guarded("g-stats", (el) => {
    const v = JSON.parse(skellam_vs_gaussian(num("g-mu")));
    plot(document.getElementById("g-plot"), [
      { xs: v.j, ys: v.skellam, color: "#9ecae1", bars: true },
      { xs: v.j, ys: v.gaussian, color: COLORS[1] },
    ], { xLabel: "photon-number difference j", yLabel: "probability" });
    legend("g-legend", [["Skellam p_j", "#9ecae1"], ["normal, variance 2μ", COLORS[1]]]);
    el.textContent = `window ${v.j[0]}..${v.j[v.j.length - 1]}, max |p_j - N(j)| = ${fmt(v.max_abs_gap)}, total variation = ${fmt(v.total_variation)}`;
  });
}

function drawCurves() {
  guarded("c-stats", (el) => {
    const v = JSON.parse(randomness_curves(num("c-min"), num("c-max"), num("c-n"), num("c-r")));
    const names = [["R0 (one detector)", v.r0], ["R1 (difference)", v.r1], ["R^U", v.r_upper], ["R^L", v.r_lower]];
    plot(document.getElementById("c-plot"),
      names.map(([, ys], i) => ({ xs: v.mu, ys, color: COLORS[i] })),
      { logX: true, xLabel: "mean photons per detector μ", yLabel: "bits per sample" });
    legend("c-legend", names.map(([n], i) => [n, COLORS[i]]));
    const last = v.mu.length - 1;
    el.textContent = `at μ = ${fmt(v.mu[last])}: R1 = ${fmt(v.r1[last])}, R^U = ${fmt(v.r_upper[last])}, R^L = ${fmt(v.r_lower[last])} bits`;
  });
}

function drawRate() {
  guarded("r-stats", (el) => {
    const v = JSON.parse(rate_vs_tau(num("r-p"), num("r-l"), num("r-r"), num("r-min"), num("r-max"), num("r-n")));
    const taus = v.points.map((p) => p.tau);
    const rates = v.points.map((p) => p.rate_lower_bps);
    plot(document.getElementById("r-plot"), [{ xs: taus, ys: rates, color: COLORS[0] }],
      { logX: true, logY: true, xLabel: "response time τ (s)", yLabel: "R^L / τ (bit/s)" });
    const peak = v.points[v.peak_index];
    const interior = v.peak_index > 0 && v.peak_index < v.points.length - 1;
    el.textContent = `peak ${fmt(peak.rate_lower_bps)} bit/s at τ = ${fmt(peak.tau)} s (μ = ${fmt(peak.mu)})` +
      (interior ? "" : "; maximum at the grid edge");
  });
}

await init();
for (const id of ["g-mu"]) document.getElementById(id).addEventListener("input", drawGaussian);
for (const id of ["c-min", "c-max", "c-n", "c-r"]) document.getElementById(id).addEventListener("input", drawCurves);
for (const id of ["r-p", "r-l", "r-r", "r-min", "r-max", "r-n"]) document.getElementById(id).addEventListener("input", drawRate);
drawGaussian();
drawCurves();
drawRate();
