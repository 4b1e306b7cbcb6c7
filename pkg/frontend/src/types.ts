// Wire types mirroring the service's published JSON schemas
// (src/aria/schemas/*.json in the backend repo).

export type EmotionCategory =
  | "happiness"
  | "sadness"
  | "anger"
  | "fear"
  | "disgust"
  | "surprise"
  | "neutral";

export type Stage =
  | "received"
  | "contextualized"
  | "retrieved"
  | "prompt_built"
  | "tool_called"
  | "completed"
  | "affect_updated"
  | "behavior_emitted";

export interface Pad {
  pleasure: number;
  arousal: number;
  dominance: number;
}

export interface TurnEvent {
  session_id: string;
  turn_id: string;
  stage: Stage;
  payload: Record<string, unknown>;
  timestamp: number;
  seq: number;
}

export interface Passage {
  chunk_id: string;
  space_id: string;
  score: number;
  rank: number;
  span: [number, number];
  text: string;
}

export interface ActiveEmotion {
  category: EmotionCategory;
  intensity: number;
  base_intensity: number;
  cause: string;
  created_at: number;
}

export interface BehaviorScript {
  turn_id: string;
  utterance: string;
  facial_expression: { emotion: EmotionCategory; intensity: number };
  gesture: string;
  gaze: { mode: string; target: number[] | null };
  issued_at: number;
}

export interface UtteranceResponse {
  turn_id: string;
  answer: string;
  emotion: EmotionCategory;
  intensity: number;
  base_intensity: number;
  cause: string;
  category: string;
  behavior_script: BehaviorScript;
}

export interface SessionCreated {
  session_id: string;
  user_id: string;
}

export interface SegmentRecord {
  user_id: string;
  session_id: string;
  span: [number, number];
  interactions: number;
  finalized_at: number;
  chunk_id: string;
}

export interface ApiError {
  code: string;
  message: string;
}
