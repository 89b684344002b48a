import { ApiClient } from "./api.js";
import { AnnotationFlow } from "./controller.js";
import { canvasToImagePixel, loupeSourceRect } from "./magnifier.js";
import { CHECKLIST_LABELS, type ChecklistKey, type PickMode } from "./pickState.js";

const FG_COLOR = "#e02020"; // lesion picks render red
const BG_COLOR = "#18a018"; // skin picks render green
const LOUPE_SIZE = 120;

const api = new ApiClient("");
const params = new URLSearchParams(location.search);
const labeller = params.get("labeller") ?? "anonymous";
const flow = new AnnotationFlow(api, labeller);

const canvas = document.querySelector<HTMLCanvasElement>("#image-canvas")!;
const ctx = canvas.getContext("2d")!;
const loupe = document.querySelector<HTMLCanvasElement>("#loupe")!;
const loupeCtx = loupe.getContext("2d")!;
const statusLine = document.querySelector<HTMLElement>("#status")!;
const banner = document.querySelector<HTMLElement>("#banner")!;
const errorBox = document.querySelector<HTMLElement>("#error")!;
const fgButton = document.querySelector<HTMLButtonElement>("#mode-fg")!;
const bgButton = document.querySelector<HTMLButtonElement>("#mode-bg")!;
const submitButton = document.querySelector<HTMLButtonElement>("#submit")!;
const undoButton = document.querySelector<HTMLButtonElement>("#undo")!;
const checklistBox = document.querySelector<HTMLElement>("#checklist")!;

let image: HTMLImageElement | null = null;

function setError(message: string | null): void {
  errorBox.textContent = message ?? "";
  errorBox.hidden = message === null;
}

function setBanner(message: string | null): void {
  banner.textContent = message ?? "";
  banner.hidden = message === null;
}

function buildChecklist(): void {
  checklistBox.innerHTML = "";
  (Object.keys(CHECKLIST_LABELS) as ChecklistKey[]).forEach((key) => {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.dataset.key = key;
    box.addEventListener("change", () => {
      flow.picks.setAttestation(key, box.checked);
      render();
    });
    label.append(box, ` ${CHECKLIST_LABELS[key]}`);
    checklistBox.append(label);
  });
}

function syncChecklist(): void {
  checklistBox
    .querySelectorAll<HTMLInputElement>("input[type=checkbox]")
    .forEach((box) => {
      box.checked = flow.picks.checklist[box.dataset.key as ChecklistKey];
    });
}

function drawPicks(): void {
  if (!image) return;
  ctx.drawImage(image, 0, 0);
  const sets: Array<[PickMode, string]> = [
    ["foreground", FG_COLOR],
    ["background", BG_COLOR],
  ];
  for (const [mode, color] of sets) {
    for (const pick of flow.picks.picks(mode)) {
      ctx.beginPath();
      ctx.arc(pick.x + 0.5, pick.y + 0.5, 4, 0, 2 * Math.PI);
      ctx.strokeStyle = color;
      ctx.lineWidth = 2;
      ctx.stroke();
      ctx.fillStyle = color;
      ctx.fillRect(pick.x, pick.y, 1, 1);
    }
  }
}

function drawLoupe(imageX: number, imageY: number): void {
  if (!image) return;
  const src = loupeSourceRect(
    imageX,
    imageY,
    image.width,
    image.height,
    LOUPE_SIZE,
    flow.picks.zoom,
  );
  loupeCtx.imageSmoothingEnabled = false;
  loupeCtx.clearRect(0, 0, LOUPE_SIZE, LOUPE_SIZE);
  loupeCtx.drawImage(
    image,
    src.x,
    src.y,
    src.width,
    src.height,
    0,
    0,
    LOUPE_SIZE,
    LOUPE_SIZE,
  );
  loupeCtx.strokeStyle = flow.picks.mode === "foreground" ? FG_COLOR : BG_COLOR;
  loupeCtx.strokeRect(LOUPE_SIZE / 2 - 2, LOUPE_SIZE / 2 - 2, 4, 4);
}

function render(): void {
  const fg = flow.picks.counterLabel("foreground");
  const bg = flow.picks.counterLabel("background");
  const imageId = flow.currentImageId ?? "-";
  statusLine.textContent =
    `labeller ${flow.labellerId} | image ${imageId} | ` +
    `annotated ${flow.annotatedCount}/${flow.totalCount} | ` +
    `lesion picks ${fg} | skin picks ${bg}`;
  fgButton.classList.toggle("active", flow.picks.mode === "foreground");
  bgButton.classList.toggle("active", flow.picks.mode === "background");
  fgButton.textContent = `Lesion (foreground) ${fg}`;
  bgButton.textContent = `Skin (background) ${bg}`;
  submitButton.disabled = !flow.picks.canSubmit() || flow.done;
  syncChecklist();
  drawPicks();
  if (flow.done) {
    setBanner("All images annotated. Thank you!");
  }
}

async function loadImage(): Promise<void> {
  const url = flow.currentImageUrl();
  if (url === null || flow.currentMeta === null) {
    image = null;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    render();
    return;
  }
  const img = new Image();
  img.src = url;
  await img.decode();
  image = img;
  canvas.width = flow.currentMeta.width;
  canvas.height = flow.currentMeta.height;
  render();
}

canvas.addEventListener("mousemove", (event) => {
  if (!image) return;
  const rect = canvas.getBoundingClientRect();
  const pixel = canvasToImagePixel(
    event.clientX,
    event.clientY,
    rect,
    image.width,
    image.height,
  );
  if (pixel) {
    flow.picks.magnifier = { ...pixel, visible: true };
    drawLoupe(pixel.x, pixel.y);
    loupe.hidden = false;
  }
});

canvas.addEventListener("mouseleave", () => {
  flow.picks.magnifier.visible = false;
  loupe.hidden = true;
});

canvas.addEventListener("click", (event) => {
  if (!image) return;
  const rect = canvas.getBoundingClientRect();
  const pixel = canvasToImagePixel(
    event.clientX,
    event.clientY,
    rect,
    image.width,
    image.height,
  );
  if (!pixel) return;
  const result = flow.picks.addPick(pixel.x, pixel.y);
  setError(result.accepted ? null : result.reason ?? null);
  render();
});

fgButton.addEventListener("click", () => {
  flow.picks.setMode("foreground");
  render();
});
bgButton.addEventListener("click", () => {
  flow.picks.setMode("background");
  render();
});
undoButton.addEventListener("click", () => {
  flow.picks.removeLastPick();
  render();
});

submitButton.addEventListener("click", async () => {
  setBanner(null);
  setError(null);
  const outcome = await flow.submit();
  switch (outcome.status) {
    case "ok":
      setBanner(`Saved. Contrast score: ${outcome.score.value.toFixed(3)}`);
      await loadImage();
      break;
    case "blocked":
      setError(`Cannot submit: ${outcome.reason}`);
      break;
    case "rejected":
      // picks stay in place so the labeller can fix the named rule
      setError(`Rejected by server: ${outcome.detail}`);
      break;
    case "network_error":
      setError(`Network problem, picks preserved: ${outcome.message}`);
      break;
  }
  render();
});

async function boot(): Promise<void> {
  buildChecklist();
  try {
    await flow.start();
  } catch (error) {
    setError(`Cannot reach the annotation service: ${String(error)}`);
    return;
  }
  await loadImage();
}

void boot();
