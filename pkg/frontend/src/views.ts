// DOM renderers. Each panel redraws from the state's view models; nothing
// here computes domain values.

import {
  ConsoleState,
  chatRows,
  padSeries,
  toolRows,
  traceRows,
} from "./state.js";

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderChat(state: ConsoleState): void {
  const html = chatRows(state)
    .map((row) => {
      const badge =
        row.emotion === null
          ? `<span class="badge pending">...</span>`
          : `<span class="badge ${row.emotion}">${row.emotion} ${(row.intensity ?? 0).toFixed(2)}</span>`;
      const gesture = row.gesture ? `<span class="gesture">${row.gesture}</span>` : "";
      return `
        <div class="turn" data-turn="${row.turnId}">
          <div class="line user"><b>you</b> ${escapeHtml(row.userText)}</div>
          <div class="line agent"><b>agent</b> ${escapeHtml(row.answer ?? "…")} ${badge}${gesture}</div>
        </div>`;
    })
    .join("");
  el("chat-log").innerHTML = html;
  el("chat-log").scrollTop = el("chat-log").scrollHeight;
}

export function renderAffect(state: ConsoleState): void {
  const canvas = el("pad-plot") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (ctx) drawPadPlot(ctx, canvas, state);
  const list = state.activeEmotions
    .map(
      (e) =>
        `<li><span class="badge ${e.category}">${e.category}</span> ` +
        `intensity ${e.intensity.toFixed(3)} (base ${e.base_intensity.toFixed(2)}, cause ${e.cause})</li>`,
    )
    .join("");
  el("active-emotions").innerHTML = list || "<li class='muted'>no active emotions</li>";
  el("gap-indicator").textContent =
    state.gaps > 0 ? `stream gaps: ${state.gaps} (${state.droppedFrames} frames dropped)` : "";
}

const PAD_COLORS: Record<string, string> = {
  pleasure: "#2a9d8f",
  arousal: "#e76f51",
  dominance: "#577590",
};

function drawPadPlot(
  ctx: CanvasRenderingContext2D,
  canvas: HTMLCanvasElement,
  state: ConsoleState,
): void {
  const samples = padSeries(state);
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#ddd";
  ctx.beginPath();
  ctx.moveTo(0, height / 2);
  ctx.lineTo(width, height / 2);
  ctx.stroke();
  if (samples.length === 0) return;
  const xStep = samples.length > 1 ? width / (samples.length - 1) : 0;
  const y = (v: number) => (height / 2) * (1 - v);
  (Object.keys(PAD_COLORS) as Array<keyof typeof PAD_COLORS>).forEach((axis) => {
    ctx.strokeStyle = PAD_COLORS[axis]!;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    samples.forEach((s, i) => {
      const v = s.mood[axis as keyof typeof s.mood];
      if (i === 0) ctx.moveTo(0, y(v));
      else ctx.lineTo(i * xStep, y(v));
    });
    ctx.stroke();
  });
}

export function renderMemory(state: ConsoleState, selectedTurn: string | null): void {
  const entry = selectedTurn
    ? state.memory.find((m) => m.turnId === selectedTurn)
    : state.memory[state.memory.length - 1];
  if (!entry) {
    el("memory-panel").innerHTML = "<p class='muted'>no retrievals yet</p>";
    return;
  }
  const section = (title: string, passages: typeof entry.knowledge) => {
    const rows = passages
      .map(
        (p) =>
          `<tr><td>${p.rank}</td><td>${p.score.toFixed(3)}</td>` +
          `<td class="mono">${p.chunk_id} [${p.span[0]},${p.span[1]})</td>` +
          `<td>${escapeHtml(p.text)}</td></tr>`,
      )
      .join("");
    return `<h4>${title}</h4><table><thead><tr><th>#</th><th>score</th><th>source</th><th>text</th></tr></thead><tbody>${
      rows || "<tr><td colspan=4 class='muted'>(none)</td></tr>"
    }</tbody></table>`;
  };
  el("memory-panel").innerHTML =
    `<p class="mono">turn ${entry.turnId}</p>` +
    section("Knowledge", entry.knowledge) +
    section("Episodic memories", entry.memories);
}

export function renderTrace(state: ConsoleState, selectedTurn: string | null): void {
  const turnIds = [...state.traces.keys()];
  const turnId = selectedTurn ?? turnIds[turnIds.length - 1];
  if (!turnId) {
    el("trace-panel").innerHTML = "<p class='muted'>no turns yet</p>";
    return;
  }
  const rows = traceRows(state, turnId)
    .map(
      (r) =>
        `<tr class="stage-${r.stage}"><td class="mono">${r.stage}</td>` +
        `<td>${escapeHtml(r.summary)}</td></tr>`,
    )
    .join("");
  const tools = toolRows(state, turnId)
    .map(
      (t) =>
        `<li class="${t.error ? "error" : ""}"><span class="mono">${t.tool}</span> ` +
        `input ${escapeHtml(JSON.stringify(t.input))} → ${escapeHtml(t.observation)}` +
        `${t.truncated ? " (truncated)" : ""}</li>`,
    )
    .join("");
  el("trace-panel").innerHTML =
    `<p class="mono">turn ${turnId}</p>` +
    `<table><tbody>${rows}</tbody></table>` +
    `<h4>Tool invocations</h4><ul>${tools || "<li class='muted'>(none)</li>"}</ul>`;
}

export function renderStatus(text: string): void {
  el("status").textContent = text;
}
