import init, { transform, run, cost_curve } from "./pkg/rru_web.js";

const EXAMPLES = {
  sum: {
    source: "sum(N,S) <=> N>1 | S := N+S1, sum(N-1,S1).\nsum(N,S) <=> N=1 | S=1.\n",
    query: "sum(9,R)",
  },
  rev: {
    source: "r([C|A],D) <=> r(A,B), a(B,[C],D).\nr([],D) <=> D=[].\n",
    query: "r([1,2,3,4,5],L)",
  },
};

const $ = (id) => document.getElementById(id);
let transformed = null;

function show(el, text, isError) {
  el.textContent = text;
  el.classList.toggle("error", Boolean(isError));
}

function levels() {
  return Math.max(0, Math.min(20, parseInt($("levels").value, 10) || 0));
}

function doTransform() {
  const out = JSON.parse(transform($("source").value, levels(), $("mode").value));
  if (out.error) {
    transformed = null;
    show($("transformed"), out.error, true);
    return;
  }
  transformed = out;
  let text = out.program + "\n% queries call " + out.entry;
  if ($("show-report").checked) {
    text += "\n\n" + out.report;
  }
  show($("transformed"), text, false);
}

function doRun() {
  let source = $("source").value;
  if ($("use-transformed").checked) {
    if (!transformed) doTransform();
    if (!transformed) return;
    source = transformed.program;
  }
  const out = JSON.parse(run(source, $("query").value, $("trace").checked));
  const lines = [];
  if (out.trace && out.trace.length) lines.push(...out.trace, "");
  lines.push(out.error ? "error: " + out.error : out.answer);
  if (out.stats) {
    lines.push(Object.entries(out.stats).map(([k, v]) => k + "=" + v).join("  "));
  }
  show($("answer"), lines.join("\n"), Boolean(out.error));
}

function drawCurve(points) {
  const canvas = $("plot");
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 40;
  ctx.clearRect(0, 0, w, h);
  const xs = points.map((p) => p.n);
  const ys = points.flatMap((p) => [p.original, p.transformed]).filter((v) => v !== null);
  const xmin = Math.min(...xs), xmax = Math.max(...xs, xmin + 1);
  const ymax = Math.max(...ys, 1);
  const px = (x) => pad + ((x - xmin) / (xmax - xmin)) * (w - 2 * pad);
  const py = (y) => h - pad - (y / ymax) * (h - 2 * pad);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#000";
  ctx.font = "12px sans-serif";
  ctx.fillText(String(ymax), 2, pad + 4);
  ctx.fillText("0", pad - 12, h - pad + 4);
  ctx.fillText(String(xmin), pad, h - pad + 16);
  ctx.fillText(String(xmax), w - pad - 20, h - pad + 16);
  for (const [key, colour] of [["original", "#c33"], ["transformed", "#36c"]]) {
    ctx.strokeStyle = colour;
    ctx.beginPath();
    let pen = false;
    for (const p of points) {
      if (p[key] === null) { pen = false; continue; }
      if (pen) ctx.lineTo(px(p.n), py(p[key])); else ctx.moveTo(px(p.n), py(p[key]));
      pen = true;
    }
    ctx.stroke();
  }
  ctx.fillStyle = "#c33";
  ctx.fillText("original", w - pad - 90, pad + 16);
  ctx.fillStyle = "#36c";
  ctx.fillText("transformed", w - pad - 90, pad + 32);
}

function doCurve() {
  const lo = parseInt($("lo").value, 10), hi = parseInt($("hi").value, 10);
  const out = JSON.parse(cost_curve($("source").value, levels(), $("mode").value, BigInt(lo), BigInt(hi)));
  if (out.error) {
    show($("curve-note"), out.error, true);
    return;
  }
  const bad = out.points.filter((p) => !p.agree).length;
  show($("curve-note"),
    out.workload + " workload, builtin cost per query" + (bad ? "; " + bad + " inputs disagree or exceed the bound" : ""),
    bad > 0);
  drawCurve(out.points);
}

function load(name) {
  $("source").value = EXAMPLES[name].source;
  $("query").value = EXAMPLES[name].query;
  transformed = null;
  $("transformed").textContent = "";
  $("answer").textContent = "";
}

await init();
for (const radio of document.querySelectorAll("input[name=example]")) {
  radio.addEventListener("change", () => load(radio.value));
}
$("source").addEventListener("input", () => { transformed = null; });
$("transform").addEventListener("click", doTransform);
$("run").addEventListener("click", doRun);
$("curve").addEventListener("click", doCurve);
load("sum");
