/** Browser bootstrap: wires real fetch, real timers, and the DOM. */

import { createApiClient, resolveBaseUrl } from "./api.js";
import { createController } from "./controller.js";
import { createDebouncer, realScheduler } from "./debounce.js";
import { renderResults, renderSuggestions } from "./view.js";

const DEBOUNCE_MS = 75;

function mount(): void {
  const input = document.querySelector<HTMLInputElement>("#query");
  const button = document.querySelector<HTMLButtonElement>("#go");
  const dropdown = document.querySelector<HTMLElement>("#dropdown");
  const results = document.querySelector<HTMLElement>("#results");
  if (!input || !button || !dropdown || !results) {
    throw new Error("search page markup is missing required elements");
  }

  const api = createApiClient(resolveBaseUrl(window.location.search), (url) =>
    fetch(url),
  );
  const controller = createController({
    api,
    debouncer: createDebouncer(realScheduler, DEBOUNCE_MS),
    onChange: (state) => {
      dropdown.innerHTML = renderSuggestions(state);
      results.innerHTML = renderResults(state);
      if (input.value !== state.query) input.value = state.query;
    },
  });

  input.addEventListener("input", () => controller.handleInput(input.value));
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") controller.submitSearch();
  });
  button.addEventListener("click", () => controller.submitSearch());
  dropdown.addEventListener("click", (event) => {
    const row = (event.target as HTMLElement).closest<HTMLElement>(".suggestion");
    if (row?.dataset.index !== undefined) {
      controller.selectSuggestion(Number(row.dataset.index));
    }
  });
}

mount();
