import { ApiClient, ApiRejection } from "./api.js";
import { PickState } from "./pickState.js";
import type { ContrastScore, ImageMeta } from "./types.js";

export type SubmitOutcome =
  | { status: "blocked"; reason: string }
  | { status: "rejected"; httpStatus: number; detail: string }
  | { status: "network_error"; message: string }
  | { status: "ok"; score: ContrastScore; nextImageId: string | null };

/**
 * Drives one labeller's annotation session: the pending queue, the per-image
 * pick state, and submission.
 *
 * The queue is always re-derived from the server's pending filter, so a page
 * reload lands back on the same image; picks themselves are local and reset
 * on reload. Pick state survives rejected submissions and network failures.
 */
export class AnnotationFlow {
  readonly picks = new PickState();
  queue: string[] = [];
  currentMeta: ImageMeta | null = null;
  lastScore: ContrastScore | null = null;
  annotatedCount = 0;
  totalCount = 0;

  constructor(
    private readonly api: ApiClient,
    readonly labellerId: string,
  ) {}

  get currentImageId(): string | null {
    return this.queue.length > 0 ? this.queue[0] : null;
  }

  get done(): boolean {
    return this.queue.length === 0;
  }

  /** Fetch the pending queue and load the first image's metadata. */
  async start(): Promise<void> {
    const all = await this.api.listImages(this.labellerId, "all");
    this.totalCount = all.total;
    const pending = await this.api.listImages(this.labellerId, "pending");
    this.queue = pending.items.map((item) => item.image_id);
    this.annotatedCount = this.totalCount - this.queue.length;
    this.picks.reset();
    await this.loadCurrent();
  }

  private async loadCurrent(): Promise<void> {
    const imageId = this.currentImageId;
    this.currentMeta = imageId === null ? null : await this.api.imageMeta(imageId);
  }

  currentImageUrl(): string | null {
    const imageId = this.currentImageId;
    return imageId === null ? null : this.api.imageFileUrl(imageId);
  }

  /**
   * Submit the current picks. Never sends an incomplete annotation: gating
   * happens here, before the network. On success the queue advances and the
   * pick state resets; on any failure the picks are preserved.
   */
  async submit(): Promise<SubmitOutcome> {
    const imageId = this.currentImageId;
    if (imageId === null) {
      return { status: "blocked", reason: "no image pending" };
    }
    const reason = this.picks.blockedReason();
    if (reason !== null) {
      return { status: "blocked", reason };
    }
    let score: ContrastScore;
    try {
      const response = await this.api.submitAnnotation(
        this.picks.toAnnotationBody(imageId, this.labellerId),
      );
      score = response.score;
    } catch (error) {
      if (error instanceof ApiRejection) {
        return { status: "rejected", httpStatus: error.status, detail: error.detail };
      }
      return { status: "network_error", message: String(error) };
    }
    this.lastScore = score;
    this.annotatedCount += 1;
    this.queue.shift();
    this.picks.reset();
    await this.loadCurrent();
    return { status: "ok", score, nextImageId: this.currentImageId };
  }
}
