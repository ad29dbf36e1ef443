/** UI state machine: keystrokes feed the suggestion dropdown, the search
 * button feeds the results pane. Overlapping responses are resolved by
 * per-kind sequence numbers; anything older than the newest issued request
 * is dropped on arrival. All state lives in one UiState value handed to
 * the render callback after every change.
 */

import type { ApiClient, ResultRow, SuggestionRow } from "./api.js";
import { ApiError } from "./api.js";
import type { Debouncer } from "./debounce.js";

export interface UiState {
  query: string;
  suggestions: SuggestionRow[];
  /** Dropdown shows only with a non-empty input and at least one row. */
  dropdownVisible: boolean;
  suggestNotice: string | null;
  searched: boolean;
  searchPending: boolean;
  results: ResultRow[];
  branch: "part_number" | "hybrid" | null;
  correctedQuery: string | null;
  degraded: boolean;
  elapsedMs: number | null;
  searchError: string | null;
}

export function initialState(): UiState {
  return {
    query: "",
    suggestions: [],
    dropdownVisible: false,
    suggestNotice: null,
    searched: false,
    searchPending: false,
    results: [],
    branch: null,
    correctedQuery: null,
    degraded: false,
    elapsedMs: null,
    searchError: null,
  };
}

export interface SearchController {
  readonly state: UiState;
  /** Every keystroke lands here with the full current input value. */
  handleInput(text: string): void;
  /** Explicit search: button click or enter. */
  submitSearch(): void;
  /** Dropdown row click: fill the input and search immediately. */
  selectSuggestion(index: number): void;
}

export interface ControllerOptions {
  api: ApiClient;
  debouncer: Debouncer;
  onChange: (state: UiState) => void;
  suggestLimit?: number;
}

export function createController(options: ControllerOptions): SearchController {
  const { api, debouncer, onChange } = options;
  const limit = options.suggestLimit ?? 10;
  const state = initialState();
  let suggestSeq = 0;
  let searchSeq = 0;

  function publish(): void {
    state.dropdownVisible = state.query.length >= 1 && state.suggestions.length > 0;
    onChange(state);
  }

  function issueSuggest(text: string): void {
    const seq = ++suggestSeq;
    api.suggest(text, limit).then(
      (response) => {
        if (seq !== suggestSeq) return; // a newer request owns the dropdown
        state.suggestions = response.suggestions;
        state.suggestNotice = null;
        publish();
      },
      (error: unknown) => {
        if (seq !== suggestSeq) return;
        state.suggestions = [];
        state.suggestNotice = `suggestions unavailable: ${describe(error)}`;
        publish();
      },
    );
  }

  function issueSearch(text: string): void {
    const seq = ++searchSeq;
    state.searchPending = true;
    publish();
    api.search(text).then(
      (response) => {
        if (seq !== searchSeq) return; // stale; a newer search was issued
        state.searched = true;
        state.searchPending = false;
        state.results = response.results;
        state.branch = response.branch;
        state.correctedQuery = response.corrected_query;
        state.degraded = response.degraded;
        state.elapsedMs = response.elapsed_ms;
        state.searchError = null;
        publish();
      },
      (error: unknown) => {
        if (seq !== searchSeq) return;
        state.searched = true;
        state.searchPending = false;
        state.results = [];
        state.branch = null;
        state.correctedQuery = null;
        state.degraded = false;
        state.elapsedMs = null;
        state.searchError = describe(error);
        publish();
      },
    );
  }

  return {
    state,
    handleInput(text: string) {
      state.query = text;
      if (text.trim().length === 0) {
        debouncer.cancel();
        suggestSeq += 1; // orphan anything in flight
        state.suggestions = [];
        state.suggestNotice = null;
        publish();
        return;
      }
      publish();
      debouncer.run(() => issueSuggest(text));
    },
    submitSearch() {
      const text = state.query.trim();
      if (!text) return;
      debouncer.cancel();
      suggestSeq += 1;
      state.suggestions = [];
      publish();
      issueSearch(text);
    },
    selectSuggestion(index: number) {
      const row = state.suggestions[index];
      if (!row) return;
      state.query = row.key;
      debouncer.cancel();
      suggestSeq += 1;
      state.suggestions = [];
      publish();
      issueSearch(row.key);
    },
  };
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return error.message;
  if (error instanceof Error) return error.message;
  return String(error);
}
