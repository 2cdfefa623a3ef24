/** World (meters) to canvas pixel transform, fixed by the workspace bounds. */

export class ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;

  constructor(public bounds: number[], public width: number, public height: number,
              public pad = 10) {
    const w = bounds[2] - bounds[0];
    const h = bounds[3] - bounds[1];
    this.scale = Math.min((width - 2 * pad) / w, (height - 2 * pad) / h);
    this.offsetX = pad + ((width - 2 * pad) - w * this.scale) / 2;
    this.offsetY = pad + ((height - 2 * pad) - h * this.scale) / 2;
  }

  toScreen(x: number, y: number): [number, number] {
    // y grows upward in world coordinates, downward on canvas
    return [
      this.offsetX + (x - this.bounds[0]) * this.scale,
      this.height - this.offsetY - (y - this.bounds[1]) * this.scale,
    ];
  }

  toWorld(px: number, py: number): [number, number] {
    return [
      this.bounds[0] + (px - this.offsetX) / this.scale,
      this.bounds[1] + (this.height - this.offsetY - py) / this.scale,
    ];
  }

  metersToPixels(m: number): number {
    return m * this.scale;
  }
}
