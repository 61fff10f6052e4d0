import init, { sample_graphml, layout_graph, cluster_graph } from "./pkg/ppkg_wasm.js";

const $ = (id) => document.getElementById(id);
const SVG_NS = "http://www.w3.org/2000/svg";
const PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
  "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"];
const DEGREE_COLORS = ["#c6dbef", "#9ecae1", "#6baed6", "#2171b5", "#08306b"];

let current = null;

function status(msg, isError = false) {
  $("status").textContent = msg;
  $("status").className = isError ? "error" : "";
}

function seed() {
  return Math.max(0, parseInt($("seed").value, 10) || 0);
}

function drawGraph(layout, labels) {
  const svg = $("graph");
  svg.replaceChildren();
  const { graph, positions } = layout;
  const index = new Map(graph.nodes.map((n, i) => [n.id, i]));
  for (const e of graph.edges) {
    const [a, b] = [positions[index.get(e.source)], positions[index.get(e.target)]];
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", a[0]); line.setAttribute("y1", -a[1]);
    line.setAttribute("x2", b[0]); line.setAttribute("y2", -b[1]);
    line.setAttribute("vector-effect", "non-scaling-stroke");
    line.addEventListener("click", () => {
      svg.querySelectorAll("line.picked").forEach((l) => l.classList.remove("picked"));
      line.classList.add("picked");
      $("edge-text").textContent = `${e.source} -[${e.relationship}]-> ${e.target}: ${e.text}`;
    });
    svg.appendChild(line);
  }
  graph.nodes.forEach((n, i) => {
    const c = document.createElementNS(SVG_NS, "circle");
    c.setAttribute("cx", positions[i][0]);
    c.setAttribute("cy", -positions[i][1]);
    c.setAttribute("r", 0.035);
    const label = labels ? labels[i] : null;
    c.setAttribute("fill", label === null ? DEGREE_COLORS[n.color_bucket % DEGREE_COLORS.length]
      : label < 0 ? "#9e9e9e" : PALETTE[label % PALETTE.length]);
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${n.label} (${n.type}, degree ${n.degree})`;
    c.appendChild(title);
    svg.appendChild(c);
  });
}

function layout() {
  try {
    current = JSON.parse(layout_graph($("graphml").value, seed()));
    drawGraph(current, null);
    $("scatter").replaceChildren();
    $("metrics").textContent = "";
    status(`${current.graph.nodes.length} nodes, ${current.graph.edges.length} edges`);
  } catch (e) {
    status(String(e.message ?? e), true);
  }
}

function cluster() {
  if (!current) layout();
  if (!current) return;
  try {
    const k = Math.max(1, parseInt($("k").value, 10) || 1);
    const r = JSON.parse(cluster_graph($("graphml").value, $("dr").value, $("clustering").value, k, seed()));
    drawGraph(current, r.labels);
    $("scatter").innerHTML = r.svg;
    const m = r.metrics;
    const fmt = (v) => (v === null || v === undefined ? "undef" : typeof v === "number" ? v.toFixed(4) : v);
    $("metrics").textContent = `clusters ${r.k_found}\nsilhouette ${fmt(m.silhouette)}\ndavies_bouldin ${fmt(m.davies_bouldin)}` +
      (m.flag ? `\n${m.flag}` : "");
    status("done");
  } catch (e) {
    status(String(e.message ?? e), true);
  }
}

await init();
$("load-sample").addEventListener("click", () => { $("graphml").value = sample_graphml(); layout(); });
$("layout").addEventListener("click", layout);
$("cluster").addEventListener("click", cluster);
$("graphml").value = sample_graphml();
layout();
