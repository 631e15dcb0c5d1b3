import init, { preview, warmup_curve, run_split } from "./pkg/ccvae_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

function config() {
  return JSON.stringify({
    synthetic: {
      num_classes: num("classes"),
      feature_dim: num("dim"),
      samples_per_class_per_domain: num("per-class"),
      class_separation: num("sep"),
      shift: $("shift").value,
      seed: num("seed"),
    },
    num_unseen: num("unseen"),
    epochs: num("epochs"),
    seed: num("seed"),
  });
}

function bounds(groups) {
  const xs = groups.flatMap((g) => g.x), ys = groups.flatMap((g) => g.y);
  return [Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys)];
}

function scatter(canvas, title, groups) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#222";
  ctx.fillText(title, 8, 14);
  const [x0, x1, y0, y1] = bounds(groups.map((g) => g.points));
  const sx = (v) => 10 + ((v - x0) / (x1 - x0 || 1)) * (canvas.width - 20);
  const sy = (v) => canvas.height - 10 - ((v - y0) / (y1 - y0 || 1)) * (canvas.height - 30);
  for (const { points, hollow } of groups) {
    points.x.forEach((x, i) => {
      const c = palette[points.label[i] % palette.length];
      ctx.beginPath();
      ctx.arc(sx(x), sy(points.y[i]), hollow ? 3.5 : 2.5, 0, 2 * Math.PI);
      if (hollow) { ctx.strokeStyle = c; ctx.stroke(); } else { ctx.fillStyle = c; ctx.fill(); }
    });
  }
}

function line(canvas, title, series) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#222";
  ctx.fillText(title, 8, 14);
  const all = series.flatMap((s) => s.values);
  const lo = Math.min(0, ...all), hi = Math.max(...all) || 1;
  for (const { values, color } of series) {
    ctx.strokeStyle = color;
    ctx.beginPath();
    values.forEach((v, i) => {
      const x = 30 + (i / Math.max(1, values.length - 1)) * (canvas.width - 40);
      const y = canvas.height - 15 - ((v - lo) / (hi - lo)) * (canvas.height - 35);
      i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    });
    ctx.stroke();
  }
  ctx.fillText(hi.toPrecision(3), 2, 26);
  ctx.fillText(lo.toPrecision(3), 2, canvas.height - 4);
}

function guard(f) {
  return () => {
    $("status").textContent = "";
    try { f(); } catch (e) { $("status").textContent = String(e); }
  };
}

$("preview").onclick = guard(() => {
  const p = JSON.parse(preview(config()));
  scatter($("source-plot"), "source (target PCA axes)", [{ points: p.source }]);
  scatter($("target-plot"), "target", [{ points: p.target }]);
  $("gap").textContent = `1NN trained on source, tested on target: ${(100 * p.source_to_target_1nn).toFixed(1)}%`;
});

$("warmup").onclick = guard(() => {
  const c = Array.from(warmup_curve(num("lambda"), num("frac"), num("epochs"), num("steps")));
  line($("warmup-plot"), "λ per training step", [{ values: c, color: "#1f77b4" }]);
});

$("run").onclick = guard(() => {
  $("status").textContent = "training...";
  setTimeout(guard(() => {
    const r = JSON.parse(run_split(config()));
    line($("loss-plot"), "epoch loss (blue) and KL (orange)", [
      { values: r.loss, color: "#1f77b4" },
      { values: r.kl, color: "#ff7f0e" },
    ]);
    scatter($("gen-plot"), `unseen ${r.unseen.join(",")}: real (dots), generated (rings)`, [
      { points: r.target },
      { points: r.generated, hollow: true },
    ]);
    const rows = r.scores.map((s) =>
      `<tr><td>${s.method}</td><td>${(100 * s.acc_seen).toFixed(1)}</td>` +
      `<td>${(100 * s.acc_unseen).toFixed(1)}</td><td>${(100 * s.h).toFixed(1)}</td></tr>`).join("");
    $("scores").innerHTML =
      `<table><tr><th>method</th><th>seen</th><th>unseen</th><th>H</th></tr>${rows}</table>`;
  }), 10);
});

await init();
$("preview").click();
$("warmup").click();
