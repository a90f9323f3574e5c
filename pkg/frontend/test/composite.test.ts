/** Client-side recomposition against values computed by the real service. */

import { describe, expect, it } from "vitest";

import { DecodedLayer, overBlend, recomposite } from "../src/composite";
import type { RGB } from "../src/types";
import recomposeCase from "./fixtures/recompose_case.json";

interface RecomposeFixture {
  width: number;
  height: number;
  background: RGB;
  layers: { color: RGB; alpha: number[][] }[];
  server_composite: number[][][];
}

const fixture = recomposeCase as unknown as RecomposeFixture;

function fixtureLayers(visible = true): DecodedLayer[] {
  return fixture.layers.map((layer) => ({
    color: layer.color,
    alpha: new Uint8ClampedArray(layer.alpha.flat()),
    visible,
  }));
}

describe("overBlend", () => {
  it("is the plain lerp toward the layer color", () => {
    expect(overBlend(0, 200, 50)).toBe(50);
    expect(overBlend(1, 200, 50)).toBe(200);
    expect(overBlend(0.25, 200, 40)).toBeCloseTo(0.25 * 200 + 0.75 * 40, 12);
  });
});

describe("recomposite", () => {
  it("matches the server composite within 1 per channel on a real job", () => {
    const { width, height } = fixture;
    const pixels = recomposite(fixture.background, fixtureLayers(), width, height);
    let worst = 0;
    for (let y = 0; y < height; y++) {
      for (let x = 0; x < width; x++) {
        const base = (y * width + x) * 4;
        for (let c = 0; c < 3; c++) {
          const diff = Math.abs(pixels[base + c] - fixture.server_composite[y][x][c]);
          worst = Math.max(worst, diff);
        }
        expect(pixels[base + 3]).toBe(255);
      }
    }
    expect(worst).toBeLessThanOrEqual(1);
  });

  it("fills with the background when every layer is hidden", () => {
    const pixels = recomposite(fixture.background, fixtureLayers(false), fixture.width, fixture.height);
    for (let p = 0; p < fixture.width * fixture.height; p++) {
      expect(pixels[p * 4]).toBe(fixture.background[0]);
      expect(pixels[p * 4 + 1]).toBe(fixture.background[1]);
      expect(pixels[p * 4 + 2]).toBe(fixture.background[2]);
    }
  });

  it("an opaque top layer hides everything below", () => {
    const layers: DecodedLayer[] = [
      { color: [10, 20, 30], alpha: new Uint8ClampedArray([128, 128]), visible: true },
      { color: [200, 100, 0], alpha: new Uint8ClampedArray([255, 255]), visible: true },
    ];
    const pixels = recomposite([0, 0, 0], layers, 2, 1);
    expect([...pixels.slice(0, 3)]).toEqual([200, 100, 0]);
    expect([...pixels.slice(4, 7)]).toEqual([200, 100, 0]);
  });

  it("a fully transparent layer changes nothing", () => {
    const base: DecodedLayer[] = [
      { color: [60, 70, 80], alpha: new Uint8ClampedArray([30, 200]), visible: true },
    ];
    const withGhost: DecodedLayer[] = [
      ...base,
      { color: [255, 0, 0], alpha: new Uint8ClampedArray([0, 0]), visible: true },
    ];
    expect(recomposite([5, 5, 5], withGhost, 2, 1)).toEqual(
      recomposite([5, 5, 5], base, 2, 1),
    );
  });

  it("rejects alpha planes of the wrong size", () => {
    const layers: DecodedLayer[] = [
      { color: [1, 2, 3], alpha: new Uint8ClampedArray([255]), visible: true },
    ];
    expect(() => recomposite([0, 0, 0], layers, 2, 2)).toThrow(/alpha plane/);
  });
});
