// Console state, derived purely from API responses and SSE frames. The
// console never recomputes affect or retrieval; every number shown comes
// from a service payload.

import type { SSEFrame } from "./sse.js";
import type {
  ActiveEmotion,
  BehaviorScript,
  Pad,
  Passage,
  Stage,
  TurnEvent,
} from "./types.js";

export interface ChatRow {
  turnId: string;
  userText: string;
  answer: string | null;
  emotion: string | null;
  intensity: number | null;
  category: string | null;
  gesture: string | null;
}

export interface PadSample {
  turnId: string;
  timestamp: number;
  mood: Pad;
}

export interface MemoryEntry {
  turnId: string;
  knowledge: Passage[];
  memories: Passage[];
}

export interface TraceRow {
  stage: Stage;
  seq: number;
  timestamp: number;
  summary: string;
  payload: Record<string, unknown>;
}

export interface ToolRow {
  turnId: string;
  tool: string;
  input: Record<string, unknown>;
  observation: string;
  truncated: boolean;
  error: boolean;
}

export interface ConsoleState {
  chat: ChatRow[];
  padSamples: PadSample[];
  activeEmotions: ActiveEmotion[];
  defaultMood: Pad | null;
  memory: MemoryEntry[];
  traces: Map<string, TraceRow[]>;
  tools: ToolRow[];
  scripts: BehaviorScript[];
  gaps: number;
  droppedFrames: number;
}

export function initialState(): ConsoleState {
  return {
    chat: [],
    padSamples: [],
    activeEmotions: [],
    defaultMood: null,
    memory: [],
    traces: new Map(),
    tools: [],
    scripts: [],
    gaps: 0,
    droppedFrames: 0,
  };
}

function chatRow(state: ConsoleState, turnId: string): ChatRow {
  let row = state.chat.find((r) => r.turnId === turnId);
  if (!row) {
    row = {
      turnId,
      userText: "",
      answer: null,
      emotion: null,
      intensity: null,
      category: null,
      gesture: null,
    };
    state.chat.push(row);
  }
  return row;
}

function summarize(event: TurnEvent): string {
  const p = event.payload as Record<string, any>;
  switch (event.stage) {
    case "received":
      return String(p.text ?? "");
    case "contextualized":
      return String(p.query ?? "");
    case "retrieved": {
      const k = (p.knowledge as unknown[] | undefined)?.length ?? 0;
      const m = (p.memories as unknown[] | undefined)?.length ?? 0;
      return `${k} knowledge, ${m} memory passages`;
    }
    case "prompt_built": {
      const blocks = (p.blocks as unknown[] | undefined)?.length ?? 0;
      return `${blocks} prompt blocks`;
    }
    case "tool_called":
      return `${p.tool}(${JSON.stringify(p.input)}) -> ${String(p.observation ?? "")}`;
    case "completed":
      return `${p.emotion}(${Number(p.intensity).toFixed(2)}) ${String(p.answer ?? "")}`;
    case "affect_updated": {
      const mood = (p.affect as any)?.mood as Pad | undefined;
      if (!mood) return "";
      return `mood P=${mood.pleasure.toFixed(3)} A=${mood.arousal.toFixed(3)} D=${mood.dominance.toFixed(3)}`;
    }
    case "behavior_emitted": {
      const script = p.script as BehaviorScript | undefined;
      return script ? `${script.gesture}, gaze ${script.gaze.mode}` : "";
    }
  }
}

export function applyTurnEvent(state: ConsoleState, event: TurnEvent): void {
  const rows = state.traces.get(event.turn_id) ?? [];
  rows.push({
    stage: event.stage,
    seq: event.seq,
    timestamp: event.timestamp,
    summary: summarize(event),
    payload: event.payload,
  });
  state.traces.set(event.turn_id, rows);

  const p = event.payload as Record<string, any>;
  switch (event.stage) {
    case "received":
      chatRow(state, event.turn_id).userText = String(p.text ?? "");
      break;
    case "retrieved":
      state.memory.push({
        turnId: event.turn_id,
        knowledge: (p.knowledge ?? []) as Passage[],
        memories: (p.memories ?? []) as Passage[],
      });
      break;
    case "tool_called":
      state.tools.push({
        turnId: event.turn_id,
        tool: String(p.tool),
        input: (p.input ?? {}) as Record<string, unknown>,
        observation: String(p.observation ?? ""),
        truncated: Boolean(p.truncated),
        error: Boolean(p.error),
      });
      break;
    case "completed": {
      const row = chatRow(state, event.turn_id);
      row.answer = String(p.answer ?? "");
      row.emotion = String(p.emotion ?? "neutral");
      row.intensity = Number(p.intensity ?? 0);
      row.category = String(p.category ?? "other");
      break;
    }
    case "affect_updated": {
      const affect = p.affect as
        | { mood: Pad; default_mood: Pad; active_emotions: ActiveEmotion[] }
        | undefined;
      if (affect) {
        state.padSamples.push({
          turnId: event.turn_id,
          timestamp: event.timestamp,
          mood: affect.mood,
        });
        state.activeEmotions = affect.active_emotions;
        state.defaultMood = affect.default_mood;
      }
      break;
    }
    case "behavior_emitted": {
      const script = p.script as BehaviorScript | undefined;
      if (script) chatRow(state, event.turn_id).gesture = script.gesture;
      break;
    }
  }
}

export function applyFrame(state: ConsoleState, frame: SSEFrame): void {
  if (frame.event === "turn_event") {
    applyTurnEvent(state, JSON.parse(frame.data) as TurnEvent);
  } else if (frame.event === "behavior_script") {
    state.scripts.push(JSON.parse(frame.data) as BehaviorScript);
  } else if (frame.event === "gap") {
    state.gaps += 1;
    const data = JSON.parse(frame.data) as { dropped?: number };
    state.droppedFrames += data.dropped ?? 0;
  }
}

// View models: exactly the rows/points each panel renders.

export function chatRows(state: ConsoleState): ChatRow[] {
  return state.chat;
}

export function padSeries(state: ConsoleState): PadSample[] {
  return state.padSamples;
}

export function memoryRows(state: ConsoleState, turnId: string): MemoryEntry | undefined {
  return state.memory.find((m) => m.turnId === turnId);
}

export function toolRows(state: ConsoleState, turnId?: string): ToolRow[] {
  return turnId ? state.tools.filter((t) => t.turnId === turnId) : state.tools;
}

export function traceRows(state: ConsoleState, turnId: string): TraceRow[] {
  return state.traces.get(turnId) ?? [];
}
