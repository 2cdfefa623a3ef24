import { describe, expect, it } from "vitest";
import { ViewTransform } from "../src/transform.js";

describe("ViewTransform", () => {
  it("round-trips world coordinates", () => {
    const tf = new ViewTransform([0, 0, 5, 5], 640, 640);
    const [px, py] = tf.toScreen(1.25, 3.5);
    const [wx, wy] = tf.toWorld(px, py);
    expect(wx).toBeCloseTo(1.25, 9);
    expect(wy).toBeCloseTo(3.5, 9);
  });

  it("flips the y axis (world up is canvas up)", () => {
    const tf = new ViewTransform([0, 0, 5, 5], 640, 640);
    const [, lowY] = tf.toScreen(2.5, 0.5);
    const [, highY] = tf.toScreen(2.5, 4.5);
    expect(highY).toBeLessThan(lowY);
  });

  it("preserves aspect for non-square workspaces", () => {
    const tf = new ViewTransform([0, 0, 10, 5], 640, 640);
    expect(tf.metersToPixels(1)).toBeCloseTo((640 - 20) / 10, 6);
  });

  it("keeps the workspace inside the canvas", () => {
    const tf = new ViewTransform([0, 0, 5, 5], 640, 480);
    for (const [x, y] of [[0, 0], [5, 0], [0, 5], [5, 5]] as const) {
      const [px, py] = tf.toScreen(x, y);
      expect(px).toBeGreaterThanOrEqual(0);
      expect(px).toBeLessThanOrEqual(640);
      expect(py).toBeGreaterThanOrEqual(0);
      expect(py).toBeLessThanOrEqual(480);
    }
  });
});
