/**
 * Scripted session walkthrough against the fake service: a ws-comb session
 * is marked page by page to exhaustion through the DOM, no thumbnail id
 * ever repeats across grids, and the metrics chart displays exactly the
 * values of the last /metrics response.
 */
import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { createApp, populateSchemes } from "../src/app.js";
import { renderGrid } from "../src/grid.js";
import { chartValues, renderMetricsChart } from "../src/metrics.js";
import { SCHEMES, SessionFlow } from "../src/session.js";
import { FakeService } from "./fake_service.js";

function client(service: FakeService): ApiClient {
  return new ApiClient("", service.fetch);
}

function gridIds(host: HTMLElement): number[] {
  return [...host.querySelectorAll<HTMLElement>(".tile")].map((tile) =>
    Number(tile.dataset.id),
  );
}

describe("ws-comb session walkthrough", () => {
  let host: HTMLElement;
  let chartHost: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = '<div id="grid"></div><div id="chart"></div>';
    host = document.getElementById("grid")!;
    chartHost = document.getElementById("chart")!;
  });

  it("marks pages to exhaustion without reshowing a thumbnail", async () => {
    const service = new FakeService();
    const flow = new SessionFlow(client(service));
    let view = await flow.start(3, "ws-comb", 10);

    const grids: number[][] = [];
    const statuses: string[] = [view.status];
    while (view.status === "awaiting_feedback" && view.cells.length > 0) {
      const callbacks = {
        onCycle: (id: number) => {
          view = flow.cycleMark(id);
        },
        onMarkRest: () => {
          view = flow.markRestNonrelevant();
        },
        onAdvance: () => {},
      };
      renderGrid(host, view, callbacks);
      grids.push(gridIds(host));

      // grid order is exactly the service page order
      expect(gridIds(host)).toEqual(view.cells.map((c) => c.id));

      // advance stays disabled until every tile is marked
      const advance = host.querySelector<HTMLButtonElement>("button.advance")!;
      expect(advance.disabled).toBe(true);
      expect(advance.textContent).toContain("unmarked");

      // click the first tile (relevant), bulk-mark the rest non-relevant
      host.querySelector<HTMLElement>(".tile")!.click();
      renderGrid(host, view, callbacks);
      host.querySelector<HTMLButtonElement>("button.mark-rest")!.click();
      expect(flow.view().unmarkedCount).toBe(0);
      expect(flow.view().canAdvance).toBe(true);

      view = await flow.advance();
      renderMetricsChart(chartHost, view.metrics);
      statuses.push(view.status);
    }

    expect(statuses[statuses.length - 1]).toBe("exhausted");
    expect(grids.length).toBeGreaterThanOrEqual(3); // two init displays + feedback pages

    // no thumbnail id repeats across grids
    const all = grids.flat();
    expect(new Set(all).size).toBe(all.length);

    // the chart displays the final /metrics response verbatim
    const plotted = chartValues(chartHost);
    const expected = service.lastMetricsResponse!.iterations;
    for (const series of ["re", "fd", "precision", "recall"] as const) {
      expect(plotted[series]).toEqual(expected.map((row) => row[series]));
    }
    // the flow's stored history is the same payload, untouched
    expect(flow.view().metrics).toEqual(expected);
  });

  it("keeps carried-relevant images in the pinned strip", async () => {
    const service = new FakeService();
    const flow = new SessionFlow(client(service));
    let view = await flow.start(0, "wos", 6);
    for (const cell of view.cells) {
      flow.setMark(cell.id, cell.id % 2 === 0 ? "relevant" : "nonrelevant");
    }
    view = await flow.advance();
    renderGrid(host, view, { onCycle() {}, onMarkRest() {}, onAdvance() {} });
    const chips = [...host.querySelectorAll<HTMLElement>(".carried-chip")].map(
      (chip) => Number(chip.dataset.id),
    );
    expect(chips).toEqual(view.carriedRelevant);
    expect(chips.length).toBeGreaterThan(0);
  });

  it("cycles a tile between relevant and nonrelevant", async () => {
    const service = new FakeService();
    const flow = new SessionFlow(client(service));
    let view = await flow.start(0, "wos", 4);
    const first = view.cells[0].id;
    expect(flow.cycleMark(first).cells[0].mark).toBe("relevant");
    expect(flow.cycleMark(first).cells[0].mark).toBe("nonrelevant");
    expect(flow.cycleMark(first).cells[0].mark).toBe("relevant");
  });

  it("refuses to advance with unmarked tiles", async () => {
    const service = new FakeService();
    const flow = new SessionFlow(client(service));
    await flow.start(0, "wos", 4);
    await expect(flow.advance()).rejects.toThrow(/unmarked/);
  });

  it("union sessions show between scope and twice-scope thumbnails", async () => {
    const service = new FakeService();
    const flow = new SessionFlow(client(service));
    const view = await flow.start(2, "ws-union", 8);
    expect(view.cells.length).toBeGreaterThanOrEqual(8);
    expect(view.cells.length).toBeLessThanOrEqual(16);
  });
});

describe("app wiring", () => {
  function elements() {
    document.body.innerHTML = `
      <form id="f"><input id="q" value="1" /><select id="s"></select>
      <input id="n" value="6" /></form>
      <div id="banner" hidden></div><div id="grid"></div><div id="chart"></div>`;
    return {
      form: document.getElementById("f") as HTMLFormElement,
      queryInput: document.getElementById("q") as HTMLInputElement,
      schemeSelect: document.getElementById("s") as HTMLSelectElement,
      scopeInput: document.getElementById("n") as HTMLInputElement,
      banner: document.getElementById("banner")!,
      gridHost: document.getElementById("grid")!,
      chartHost: document.getElementById("chart")!,
    };
  }

  it("offers all four schemes in the selector", () => {
    const els = elements();
    populateSchemes(els.schemeSelect);
    const values = [...els.schemeSelect.options].map((o) => o.value);
    expect(values).toEqual([...SCHEMES]);
  });

  it("starts a session from the form and renders the grid", async () => {
    const els = elements();
    const service = new FakeService();
    createApp(els, client(service));
    els.form.dispatchEvent(new Event("submit"));
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(els.gridHost.querySelectorAll(".tile").length).toBe(6);
    expect(els.banner.hidden).toBe(true);
  });

  it("shows an error banner and no grid on service failure", async () => {
    const els = elements();
    const service = new FakeService();
    createApp(els, client(service));
    els.queryInput.value = "9999"; // unknown image -> 404
    els.form.dispatchEvent(new Event("submit"));
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(els.banner.hidden).toBe(false);
    expect(els.banner.textContent).toContain("unknown_image");
    expect(els.gridHost.querySelectorAll(".tile").length).toBe(0);
  });
});

describe("api client", () => {
  it("maps service errors to ApiError with code and message", async () => {
    const service = new FakeService();
    const api = client(service);
    try {
      await api.createSession(12345, "wos", 10);
      throw new Error("expected rejection");
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      const apiErr = err as ApiError;
      expect(apiErr.status).toBe(404);
      expect(apiErr.code).toBe("unknown_image");
    }
  });

  it("builds image urls with the variant parameter", () => {
    const api = new ApiClient("http://x");
    expect(api.imageUrl(7)).toBe("http://x/images/7?variant=thumb");
    expect(api.imageUrl(7, "full")).toBe("http://x/images/7?variant=full");
  });
});
