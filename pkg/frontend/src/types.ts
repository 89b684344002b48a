/** Wire types of the annotation service API. */

export interface ImageSummary {
  image_id: string;
  file: string;
  annotated?: boolean;
}

export interface ImagePage {
  page: number;
  page_size: number;
  total: number;
  items: ImageSummary[];
}

export interface ImageMeta {
  image_id: string;
  width: number;
  height: number;
  annotated_by: string[];
  file: string;
}

export interface PickCoordinate {
  x: number;
  y: number;
}

/** Checklist attestations required before an annotation may be submitted. */
export interface Checklist {
  avoid_ulceration: boolean;
  avoid_adjacent: boolean;
  matched_lighting: boolean;
}

export interface AnnotationBody {
  schema_version: 1;
  image_id: string;
  labeller_id: string;
  /** Coordinates only: the server re-reads pixel colors at these points. */
  foreground: PickCoordinate[];
  background: PickCoordinate[];
  lighting_flag: boolean;
  checklist: Checklist;
}

export interface ContrastScore {
  value: number;
  lighter: number;
  darker: number;
}

export interface SubmitResponse {
  annotation: unknown;
  replaced_previous: boolean;
  score: ContrastScore;
}

export interface ScoreEntry {
  image_id: string;
  labeller_id: string;
  contrast_score: number;
}

export interface ScoresManifest {
  labeller: string | null;
  scores: ScoreEntry[];
}
