import init, { Demo } from "./pkg/hlp_web_demo.js";

const $ = (id) => document.getElementById(id);
let demo = null;

function status(msg) {
  $("status").textContent = msg || "";
}

function drawSpectrum() {
  const c = $("spectrum");
  const g = c.getContext("2d");
  const sigma = demo.spectrum();
  const k = Number($("k").value);
  g.clearRect(0, 0, c.width, c.height);
  const w = c.width / sigma.length;
  const top = Math.max(...sigma, 1e-12);
  sigma.forEach((s, i) => {
    const h = (s / top) * (c.height - 20);
    g.fillStyle = i < k ? "#2b6cb0" : "#bcccdc";
    g.fillRect(i * w, c.height - h, Math.max(w - 1, 1), h);
  });
  g.fillStyle = "#333";
  g.fillText(`σ1 = ${top.toFixed(3)}`, 6, 12);
}

function drawHeatmap() {
  const k = Number($("k").value);
  $("k-val").textContent = k;
  const n = demo.n();
  const values = demo.reconstruction(k);
  let scale = 1e-12;
  values.forEach((v) => { scale = Math.max(scale, Math.abs(v)); });
  const c = $("heatmap");
  const g = c.getContext("2d");
  const img = g.createImageData(n, n);
  values.forEach((v, i) => {
    const t = Math.min(Math.abs(v) / scale, 1);
    const fade = Math.round(255 * (1 - t));
    img.data.set(v < 0 ? [255, fade, fade, 255] : [fade, fade, 255, 255], 4 * i);
  });
  const off = new OffscreenCanvas(n, n);
  off.getContext("2d").putImageData(img, 0, 0);
  g.imageSmoothingEnabled = false;
  g.clearRect(0, 0, c.width, c.height);
  g.drawImage(off, 0, 0, c.width, c.height);

  const labels = demo.labels();
  g.strokeStyle = "#000";
  for (let i = 1; i < n; i++) {
    if (labels[i] !== labels[i - 1]) {
      const p = (i / n) * c.width;
      g.beginPath(); g.moveTo(p, 0); g.lineTo(p, c.height); g.stroke();
      g.beginPath(); g.moveTo(0, p); g.lineTo(c.width, p); g.stroke();
    }
  }
  $("neg").textContent = `${(100 * demo.negative_fraction(k)).toFixed(1)}% of off-diagonal entries`;
  drawSpectrum();
}

function rankGrid(n) {
  const ks = [];
  for (let k = 1; k <= n; k = Math.max(k + 1, Math.round(k * 1.5))) ks.push(k);
  if (ks[ks.length - 1] !== n) ks.push(n);
  return ks;
}

function drawCurve() {
  const n = demo.n();
  const k2 = Number($("k2").value);
  const epochs = Number($("epochs").value);
  const ks = rankGrid(n);
  const acc = demo.accuracy_curve(new Uint32Array(ks), k2, epochs);
  const base = demo.baseline_accuracy(epochs);

  const c = $("accuracy");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const pad = 30;
  const x = (k) => pad + (Math.log(k) / Math.log(n)) * (c.width - 2 * pad);
  const y = (a) => c.height - pad - a * (c.height - 2 * pad);
  g.strokeStyle = "#999";
  g.strokeRect(pad, pad, c.width - 2 * pad, c.height - 2 * pad);
  g.fillStyle = "#333";
  g.fillText("1.0", 4, y(1) + 4);
  g.fillText("0.0", 4, y(0) + 4);
  g.fillText("k1 (log scale)", c.width / 2 - 30, c.height - 8);

  g.setLineDash([5, 4]);
  g.strokeStyle = "#888";
  g.beginPath(); g.moveTo(pad, y(base)); g.lineTo(c.width - pad, y(base)); g.stroke();
  g.setLineDash([]);

  g.strokeStyle = "#c05621";
  g.beginPath();
  ks.forEach((k, i) => (i ? g.lineTo(x(k), y(acc[i])) : g.moveTo(x(k), y(acc[i]))));
  g.stroke();
  ks.forEach((k, i) => {
    g.fillStyle = "#c05621";
    g.fillRect(x(k) - 2, y(acc[i]) - 2, 4, 4);
    g.fillStyle = "#333";
    g.fillText(String(k), x(k) - 4, c.height - pad + 12);
  });
}

function build() {
  try {
    status();
    demo = new Demo(Number($("n").value), Number($("classes").value), Number($("homophily").value), Number($("seed").value));
    $("k").max = demo.n();
    if (Number($("k").value) > demo.n()) $("k").value = demo.n();
    $("summary").textContent = `edge homophily ${demo.homophily().toFixed(2)}`;
    drawHeatmap();
  } catch (e) {
    status(String(e));
  }
}

function guarded(f) {
  return () => {
    try { status(); f(); } catch (e) { status(String(e)); }
  };
}

await init();
$("homophily").addEventListener("input", () => { $("homophily-val").textContent = Number($("homophily").value).toFixed(2); });
$("build").addEventListener("click", build);
$("k").addEventListener("input", guarded(drawHeatmap));
$("curve").addEventListener("click", () => {
  status("training...");
  setTimeout(guarded(drawCurve), 10);
});
build();
