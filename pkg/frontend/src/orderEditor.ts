/** Drag-and-drop layer ordering.
 *
 * Renders the current order as swatch rows (bottom of the list = bottom of
 * the paint stack) and emits the reordered permutation; an active job locks
 * the editor. Invalid permutations are impossible by construction.
 */

import type { RGB } from "./types";

export interface OrderEditorCallbacks {
  onReorder: (from: number, to: number) => void;
  onSubmit: () => void;
  onRemoveColor: (index: number) => void;
}

export class OrderEditor {
  private locked = false;

  constructor(
    readonly list: HTMLElement,
    readonly submitButton: HTMLButtonElement,
    readonly callbacks: OrderEditorCallbacks,
  ) {
    submitButton.addEventListener("click", () => {
      if (!this.locked) this.callbacks.onSubmit();
    });
  }

  setLocked(locked: boolean): void {
    this.locked = locked;
    this.submitButton.disabled = locked;
    this.list.classList.toggle("locked", locked);
  }

  render(order: number[], colors: RGB[], backgroundIndex: number): void {
    this.list.textContent = "";
    order.forEach((colorIndex, position) => {
      const row = document.createElement("li");
      row.className = "swatch-row";
      row.draggable = !this.locked;
      row.dataset.position = String(position);

      const swatch = document.createElement("span");
      swatch.className = "swatch";
      const [r, g, b] = colors[colorIndex];
      swatch.style.backgroundColor = `rgb(${r},${g},${b})`;

      const label = document.createElement("span");
      label.textContent =
        position === 0
          ? `color ${colorIndex} (background)`
          : `color ${colorIndex} (layer ${position})`;

      row.append(swatch, label);

      if (colorIndex !== backgroundIndex && !this.locked) {
        const remove = document.createElement("button");
        remove.textContent = "remove";
        remove.className = "remove-color";
        remove.addEventListener("click", (e) => {
          e.stopPropagation();
          this.callbacks.onRemoveColor(colorIndex);
        });
        row.append(remove);
      }

      row.addEventListener("dragstart", (e) => {
        if (this.locked) return;
        e.dataTransfer?.setData("text/plain", String(position));
      });
      row.addEventListener("dragover", (e) => e.preventDefault());
      row.addEventListener("drop", (e) => {
        e.preventDefault();
        if (this.locked) return;
        const from = Number(e.dataTransfer?.getData("text/plain"));
        if (!Number.isNaN(from) && from !== position) {
          this.callbacks.onReorder(from, position);
        }
      });

      this.list.append(row);
    });
  }
}
