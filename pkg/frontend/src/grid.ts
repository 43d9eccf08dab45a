/**
 * Thumbnail grid and carried-relevant strip rendering.
 *
 * Cells carry their mark in a data attribute so both CSS and tests can see
 * it; clicking a cell cycles relevant/nonrelevant through the callbacks.
 */
import { SessionView } from "./session.js";

export interface GridCallbacks {
  onCycle(id: number): void;
  onMarkRest(): void;
  onAdvance(): void;
}

export function renderGrid(
  container: HTMLElement,
  view: SessionView,
  callbacks: GridCallbacks,
): void {
  container.textContent = "";

  const strip = document.createElement("div");
  strip.className = "carried-strip";
  strip.dataset.count = String(view.carriedRelevant.length);
  for (const id of view.carriedRelevant) {
    const chip = document.createElement("span");
    chip.className = "carried-chip";
    chip.dataset.id = String(id);
    chip.textContent = `#${id}`;
    strip.appendChild(chip);
  }
  container.appendChild(strip);

  const grid = document.createElement("div");
  grid.className = "grid";
  for (const cell of view.cells) {
    const tile = document.createElement("figure");
    tile.className = "tile";
    tile.dataset.id = String(cell.id);
    tile.dataset.mark = cell.mark;
    const img = document.createElement("img");
    img.src = cell.thumbUrl;
    img.alt = `image ${cell.id} (rank ${cell.rank})`;
    const caption = document.createElement("figcaption");
    caption.textContent = `#${cell.id} · rank ${cell.rank} · ${cell.mark}`;
    tile.append(img, caption);
    tile.addEventListener("click", () => callbacks.onCycle(cell.id));
    grid.appendChild(tile);
  }
  container.appendChild(grid);

  const controls = document.createElement("div");
  controls.className = "controls";

  const budget = document.createElement("span");
  budget.className = "budget";
  budget.textContent = `${view.scheme} · iteration ${view.iteration}/${view.totalIterations} · ${view.status}`;
  controls.appendChild(budget);

  const markRest = document.createElement("button");
  markRest.className = "mark-rest";
  markRest.textContent = "mark rest non-relevant";
  markRest.disabled = view.status !== "awaiting_feedback";
  markRest.addEventListener("click", () => callbacks.onMarkRest());
  controls.appendChild(markRest);

  const advance = document.createElement("button");
  advance.className = "advance";
  advance.disabled = !view.canAdvance;
  advance.textContent = view.canAdvance
    ? "next iteration"
    : view.status !== "awaiting_feedback"
      ? `session ${view.status}`
      : `${view.unmarkedCount} unmarked`;
  advance.addEventListener("click", () => callbacks.onAdvance());
  controls.appendChild(advance);

  container.appendChild(controls);
}
