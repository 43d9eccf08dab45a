/**
 * Page wiring: scheme selector, query input, error banner, grid, chart.
 */
import { ApiClient, ApiError } from "./api.js";
import { renderGrid } from "./grid.js";
import { chartValues, renderMetricsChart } from "./metrics.js";
import { SCHEMES, SessionFlow } from "./session.js";

export interface AppElements {
  form: HTMLFormElement;
  queryInput: HTMLInputElement;
  schemeSelect: HTMLSelectElement;
  scopeInput: HTMLInputElement;
  banner: HTMLElement;
  gridHost: HTMLElement;
  chartHost: HTMLElement;
}

export function populateSchemes(select: HTMLSelectElement): void {
  select.textContent = "";
  for (const scheme of SCHEMES) {
    const option = document.createElement("option");
    option.value = scheme;
    option.textContent = scheme;
    select.appendChild(option);
  }
}

export function createApp(elements: AppElements, client: ApiClient) {
  const flow = new SessionFlow(client);

  const showError = (err: unknown) => {
    const message =
      err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    elements.banner.textContent = message;
    elements.banner.hidden = false;
  };

  const refresh = () => {
    const view = flow.view();
    elements.banner.hidden = true;
    renderGrid(elements.gridHost, view, {
      onCycle: (id) => {
        flow.cycleMark(id);
        refresh();
      },
      onMarkRest: () => {
        flow.markRestNonrelevant();
        refresh();
      },
      onAdvance: () => {
        flow
          .advance()
          .then(refresh)
          .catch(showError);
      },
    });
    renderMetricsChart(elements.chartHost, view.metrics);
  };

  elements.form.addEventListener("submit", (event) => {
    event.preventDefault();
    const queryId = Number(elements.queryInput.value);
    const scope = Number(elements.scopeInput.value) || 20;
    flow
      .start(queryId, elements.schemeSelect.value, scope)
      .then(refresh)
      .catch(showError); // error banner, no partial grid
  });

  populateSchemes(elements.schemeSelect);
  return { flow, refresh, chartValues: () => chartValues(elements.chartHost) };
}
