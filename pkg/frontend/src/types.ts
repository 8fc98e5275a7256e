/** Wire types mirroring the engine's JSON API. */

export interface LossBreakdown {
  incoherence: number;
  repeat: number;
  sentLen: number;
}

export interface PoolCandidate {
  id: string;
  text: string;
  source_module: string;
  base_confidence: number;
  context: number;
  loss: LossBreakdown;
  final_confidence: number;
  invalidated: boolean;
  priority: boolean;
  topic: string | null;
  entities: string[];
  discourse_relation: string | null;
  prompt_id: string;
}

export interface TurnDebug {
  pool: PoolCandidate[];
  winner_id: string | null;
  winner_via: string;
  active_module: string | null;
  discourse_relation: string | null;
  mood: string | null;
  flow: Record<string, unknown>;
}

export interface TurnResponse {
  reply: { text: string; ssml: string };
  debug: TurnDebug;
  ended: boolean;
}

export interface TranscriptEntry {
  speaker: "user" | "agent";
  text: string;
  timestamp: number;
}

export interface SessionSummary {
  session_id: string;
  turn_count: number;
  active_module: string | null;
  explored_topics: string[];
  transcript: TranscriptEntry[];
  ended: boolean;
}
