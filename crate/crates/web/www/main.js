import init, { edge_moments, edge_distribution, edge_sequence, normal_order } from "./pkg/rulealg_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function guard(errId, f) {
  try {
    $(errId).textContent = "";
    f();
  } catch (e) {
    $(errId).textContent = String(e.message ?? e);
  }
}

function axes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
}

function plotMoments() {
  const tmax = num("tmax");
  const data = JSON.parse(edge_moments(num("nv"), num("ne"), num("kp"), num("km"), tmax, 200));
  const c = $("moments"), ctx = c.getContext("2d"), pad = 30;
  axes(ctx, c.width, c.height, pad);
  const top = Math.max(1, ...data.mean, ...data.variance);
  const x = (t) => pad + (t / tmax) * (c.width - 2 * pad);
  const y = (v) => c.height - pad - (v / top) * (c.height - 2 * pad);
  for (const [key, colour] of [["mean", "#1565c0"], ["variance", "#c62828"]]) {
    ctx.strokeStyle = colour;
    ctx.beginPath();
    data.time.forEach((t, i) => (i ? ctx.lineTo(x(t), y(data[key][i])) : ctx.moveTo(x(t), y(data[key][i]))));
    ctx.stroke();
    ctx.fillStyle = colour;
    ctx.fillText(key, c.width - pad - 60, key === "mean" ? pad : pad + 14);
  }
  ctx.fillStyle = "#222";
  ctx.fillText(top.toFixed(2), 2, pad);
  ctx.fillText(tmax.toString(), c.width - pad - 10, c.height - pad + 14);
  const t = num("t") * tmax;
  $("tval").textContent = `t = ${t.toFixed(2)}`;
  ctx.strokeStyle = "#aaa";
  ctx.beginPath();
  ctx.moveTo(x(t), pad);
  ctx.lineTo(x(t), c.height - pad);
  ctx.stroke();
  plotDistribution(t);
}

function plotDistribution(t) {
  const p = edge_distribution(num("nv"), num("ne"), num("kp"), num("km"), t);
  const c = $("dist"), ctx = c.getContext("2d"), pad = 30;
  axes(ctx, c.width, c.height, pad);
  const top = Math.max(...p);
  const bw = (c.width - 2 * pad) / p.length;
  ctx.fillStyle = "#2e7d32";
  p.forEach((v, i) => {
    const hgt = (v / top) * (c.height - 2 * pad);
    ctx.fillRect(pad + i * bw + 1, c.height - pad - hgt, Math.max(1, bw - 2), hgt);
  });
  ctx.fillStyle = "#222";
  ctx.fillText(`P max ${top.toFixed(3)}`, pad + 4, pad - 8);
  ctx.fillText(`0 .. ${p.length - 1} edges`, c.width - pad - 80, c.height - pad + 14);
}

function table(el, header, rows) {
  el.innerHTML = "";
  const tr = el.insertRow();
  header.forEach((h) => { const th = document.createElement("th"); th.textContent = h; tr.appendChild(th); });
  rows.forEach((row) => { const r = el.insertRow(); row.forEach((v) => { r.insertCell().textContent = v; }); });
}

function showSequence() {
  const rows = JSON.parse(edge_sequence(num("n")));
  table($("seq"), ["multiplicities", "coefficient"], rows.map((r) => [r.partition.join(", "), r.coefficient]));
}

function showNormalOrder() {
  const res = JSON.parse(normal_order(num("r"), num("s"), num("k"), num("l")));
  $("no-check").textContent = res.agrees ? "Engine and closed form agree." : "Engine and closed form differ.";
  table($("no"), ["coefficient", "created", "deleted"], res.terms.map((t) => [t.coefficient, t.created, t.deleted]));
}

await init();
const moments = () => guard("moments-error", plotMoments);
const sequence = () => guard("seq-error", showSequence);
const order = () => guard("no-error", showNormalOrder);
["nv", "ne", "kp", "km", "tmax", "t"].forEach((id) => $(id).addEventListener("input", moments));
$("n").addEventListener("input", sequence);
["r", "s", "k", "l"].forEach((id) => $(id).addEventListener("input", order));
moments();
sequence();
order();
