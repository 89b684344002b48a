import type {
  AnnotationBody,
  ImageMeta,
  ImagePage,
  ScoresManifest,
  SubmitResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** The server rejected the submission (4xx) and named the violated rule. */
export class ApiRejection extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiRejection";
  }
}

async function rejectionFrom(response: Response): Promise<ApiRejection> {
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") {
      detail = body.detail;
    } else if (body.detail !== undefined) {
      detail = JSON.stringify(body.detail);
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiRejection(response.status, detail);
}

/** Thin typed client for the annotation service. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  imageFileUrl(imageId: string): string {
    return `${this.baseUrl}/api/images/${encodeURIComponent(imageId)}/file`;
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`);
    if (!response.ok) {
      throw await rejectionFrom(response);
    }
    return (await response.json()) as T;
  }

  async health(): Promise<{ status: string; images: number; annotations: number }> {
    return this.getJson("/api/health");
  }

  async listImages(
    labeller: string,
    filter: "annotated" | "pending" | "all",
    page = 1,
    pageSize = 500,
  ): Promise<ImagePage> {
    const params = new URLSearchParams({
      labeller,
      filter,
      page: String(page),
      page_size: String(pageSize),
    });
    return this.getJson(`/api/images?${params}`);
  }

  async imageMeta(imageId: string): Promise<ImageMeta> {
    return this.getJson(`/api/images/${encodeURIComponent(imageId)}`);
  }

  async submitAnnotation(body: AnnotationBody): Promise<SubmitResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/annotations`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw await rejectionFrom(response);
    }
    return (await response.json()) as SubmitResponse;
  }

  async scores(labeller: string): Promise<ScoresManifest> {
    const params = new URLSearchParams({ labeller });
    return this.getJson(`/api/scores?${params}`);
  }
}
