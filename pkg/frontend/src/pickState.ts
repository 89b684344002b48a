import type { AnnotationBody, Checklist, PickCoordinate } from "./types.js";

export type PickMode = "foreground" | "background";

export const PICKS_PER_MODE = 3;

export type ChecklistKey = keyof Checklist;

export const CHECKLIST_LABELS: Record<ChecklistKey, string> = {
  avoid_ulceration:
    "Picks avoid active bleeding sites, ulceration and dark scar tissue",
  avoid_adjacent:
    "Background picks are on normal perilesional skin, not immediately adjacent to the lesion",
  matched_lighting:
    "Foreground and background picks share the same lighting condition",
};

/**
 * Per-image picking state: the current mode, up to three picks per mode
 * (picking a fourth replaces the oldest), the blocking checklist
 * attestations, and the magnifier state. Submission is possible only once
 * 3+3 picks exist and every attestation is set.
 */
export class PickState {
  mode: PickMode = "foreground";
  foreground: PickCoordinate[] = [];
  background: PickCoordinate[] = [];
  checklist: Checklist = {
    avoid_ulceration: false,
    avoid_adjacent: false,
    matched_lighting: false,
  };
  zoom = 4;
  magnifier: { x: number; y: number; visible: boolean } = {
    x: 0,
    y: 0,
    visible: false,
  };

  picks(mode: PickMode): PickCoordinate[] {
    return mode === "foreground" ? this.foreground : this.background;
  }

  setMode(mode: PickMode): void {
    this.mode = mode;
  }

  /**
   * Record a pick at integer pixel coordinates in the current mode.
   * A coordinate already picked in the other mode is refused (the regions
   * must stay disjoint); when the mode already holds three picks, the
   * oldest one is replaced.
   */
  addPick(x: number, y: number): { accepted: boolean; reason?: string } {
    const pick = { x: Math.round(x), y: Math.round(y) };
    const other = this.picks(this.mode === "foreground" ? "background" : "foreground");
    if (other.some((p) => p.x === pick.x && p.y === pick.y)) {
      return {
        accepted: false,
        reason: "that pixel is already picked in the other mode",
      };
    }
    const own = this.picks(this.mode);
    const existing = own.findIndex((p) => p.x === pick.x && p.y === pick.y);
    if (existing !== -1) {
      return { accepted: false, reason: "that pixel is already picked" };
    }
    if (own.length === PICKS_PER_MODE) {
      own.shift();
    }
    own.push(pick);
    return { accepted: true };
  }

  removeLastPick(): void {
    this.picks(this.mode).pop();
  }

  setAttestation(key: ChecklistKey, value: boolean): void {
    this.checklist[key] = value;
  }

  counterLabel(mode: PickMode): string {
    return `${this.picks(mode).length}/${PICKS_PER_MODE}`;
  }

  picksComplete(): boolean {
    return (
      this.foreground.length === PICKS_PER_MODE &&
      this.background.length === PICKS_PER_MODE
    );
  }

  checklistComplete(): boolean {
    return Object.values(this.checklist).every(Boolean);
  }

  canSubmit(): boolean {
    return this.picksComplete() && this.checklistComplete();
  }

  /** Why submission is blocked, or null when it isn't. */
  blockedReason(): string | null {
    if (!this.picksComplete()) {
      return (
        `picks incomplete: foreground ${this.counterLabel("foreground")}, ` +
        `background ${this.counterLabel("background")}`
      );
    }
    if (!this.checklistComplete()) {
      const missing = (Object.keys(this.checklist) as ChecklistKey[]).filter(
        (k) => !this.checklist[k],
      );
      return `checklist incomplete: ${missing.join(", ")}`;
    }
    return null;
  }

  reset(): void {
    this.foreground = [];
    this.background = [];
    this.checklist = {
      avoid_ulceration: false,
      avoid_adjacent: false,
      matched_lighting: false,
    };
    this.mode = "foreground";
  }

  /** Request body for the service: coordinates only, never pixel colors. */
  toAnnotationBody(imageId: string, labellerId: string): AnnotationBody {
    return {
      schema_version: 1,
      image_id: imageId,
      labeller_id: labellerId,
      foreground: this.foreground.map((p) => ({ x: p.x, y: p.y })),
      background: this.background.map((p) => ({ x: p.x, y: p.y })),
      lighting_flag: this.checklist.matched_lighting,
      checklist: { ...this.checklist },
    };
  }
}
