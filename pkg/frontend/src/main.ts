import { ApiClient, ServiceError } from "./api.js";
import { openEventStream } from "./sse.js";
import { applyFrame, initialState } from "./state.js";
import { renderAffect, renderChat, renderMemory, renderStatus, renderTrace } from "./views.js";

const params = new URLSearchParams(location.search);
const baseUrl = params.get("service") ?? "http://127.0.0.1:8080";
const api = new ApiClient(baseUrl);

const state = initialState();
let sessionId: string | null = null;
let selectedTurn: string | null = null;

function rerender(): void {
  renderChat(state);
  renderAffect(state);
  renderMemory(state, selectedTurn);
  renderTrace(state, selectedTurn);
}

async function start(): Promise<void> {
  const userId = (document.getElementById("user-id") as HTMLInputElement).value.trim();
  try {
    const created = await api.createSession(userId || undefined);
    sessionId = created.session_id;
    renderStatus(`session ${created.session_id} as ${created.user_id} @ ${baseUrl}`);
    openEventStream(api.eventsUrl(sessionId), {
      onFrame: (frame) => {
        applyFrame(state, frame);
        rerender();
      },
      onStatus: (status) => {
        if (status !== "open") renderStatus(`stream ${status}…`);
      },
      onGap: () => {
        state.gaps += 1;
        rerender();
      },
    });
  } catch (err) {
    renderStatus(describe(err));
  }
}

async function send(): Promise<void> {
  const box = document.getElementById("utterance") as HTMLInputElement;
  const text = box.value.trim();
  if (!text || !sessionId) return;
  box.value = "";
  try {
    // the SSE frames drive all panels; the response is only needed for errors
    await api.sendUtterance(sessionId, text);
  } catch (err) {
    renderStatus(describe(err));
  }
}

function describe(err: unknown): string {
  if (err instanceof ServiceError) return `error ${err.code}: ${err.message}`;
  return `error: ${String(err)}`;
}

document.getElementById("start")!.addEventListener("click", () => void start());
document.getElementById("send")!.addEventListener("click", () => void send());
document.getElementById("utterance")!.addEventListener("keydown", (e) => {
  if ((e as KeyboardEvent).key === "Enter") void send();
});
document.getElementById("chat-log")!.addEventListener("click", (e) => {
  const turn = (e.target as HTMLElement).closest<HTMLElement>(".turn");
  if (turn?.dataset.turn) {
    selectedTurn = turn.dataset.turn;
    rerender();
  }
});

renderStatus(`service: ${baseUrl} - enter a user id and press Start`);
