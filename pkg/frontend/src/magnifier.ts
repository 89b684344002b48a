/** Geometry for the loupe that follows the cursor during pick placement. */

export interface SourceRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

/**
 * Source rectangle of the image to magnify for a loupe of ``loupeSize``
 * display pixels at ``zoom`` magnification, centered on the cursor and
 * clamped to the image bounds.
 */
export function loupeSourceRect(
  cursorX: number,
  cursorY: number,
  imageWidth: number,
  imageHeight: number,
  loupeSize: number,
  zoom: number,
): SourceRect {
  const side = loupeSize / zoom;
  const x = Math.min(Math.max(cursorX - side / 2, 0), Math.max(imageWidth - side, 0));
  const y = Math.min(Math.max(cursorY - side / 2, 0), Math.max(imageHeight - side, 0));
  return {
    x,
    y,
    width: Math.min(side, imageWidth),
    height: Math.min(side, imageHeight),
  };
}

/** Map a client (CSS) position on the canvas to integer image pixel coords. */
export function canvasToImagePixel(
  clientX: number,
  clientY: number,
  rect: { left: number; top: number; width: number; height: number },
  imageWidth: number,
  imageHeight: number,
): { x: number; y: number } | null {
  if (rect.width === 0 || rect.height === 0) {
    return null;
  }
  const fx = (clientX - rect.left) / rect.width;
  const fy = (clientY - rect.top) / rect.height;
  if (fx < 0 || fx >= 1 || fy < 0 || fy >= 1) {
    return null;
  }
  return {
    x: Math.min(Math.floor(fx * imageWidth), imageWidth - 1),
    y: Math.min(Math.floor(fy * imageHeight), imageHeight - 1),
  };
}
