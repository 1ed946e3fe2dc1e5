// Payload shapes of the review service API.

export type Status = "auto" | "confirmed" | "edited" | "rejected";

export interface Unit {
  tu_id: string;
  src_text: string;
  tgt_text: string;
  src_lang: string;
  tgt_lang: string;
  doc_key: string;
  bead_type: string;
  confidence: number;
  status: Status;
  needs_review: boolean;
  position: number;
}

export interface UnitPage {
  units: Unit[];
  total: number;
  page: number;
  page_size: number;
}

export interface UnitEnvelope {
  unit: Unit;
  prev: string | null;
  next: string | null;
}

export type Decision =
  | { action: "accept" }
  | { action: "reject" }
  | { action: "edit"; src_text: string; tgt_text: string }
  | { action: "merge"; with_tu_id: string }
  | { action: "split"; src_boundary: number; tgt_boundary: number };

export interface DecisionResult {
  applied: boolean;
  reason?: string;
  unit?: Unit | null;
  removed?: string[];
  created?: string[];
}

export interface Stats {
  tu_count: number;
  src_words: number;
  tgt_words: number;
  src_rate: number;
  tgt_rate: number;
  empty: boolean;
  status_counts: Record<Status, number>;
  needs_review: number;
}

export type StatusFilter = Status | "needs_review" | "";

export interface Filter {
  status: StatusFilter;
  docKey: string;
  sort: "position" | "confidence";
}
