import type { Scheduler } from "../src/debounce.js";
import type {
  ApiClient,
  SearchResponse,
  SuggestResponse,
  SuggestionRow,
  ResultRow,
} from "../src/api.js";

/** Timer queue driven by hand; nothing fires until advance() reaches it. */
export function manualClock(): Scheduler & { advance(ms: number): void } {
  let now = 0;
  let nextId = 1;
  const tasks = new Map<number, { at: number; fn: () => void }>();
  return {
    schedule(fn, delayMs) {
      const id = nextId++;
      tasks.set(id, { at: now + delayMs, fn });
      return id;
    },
    cancel(id) {
      tasks.delete(id);
    },
    advance(ms) {
      now += ms;
      const due = [...tasks.entries()]
        .filter(([, t]) => t.at <= now)
        .sort((a, b) => a[1].at - b[1].at);
      for (const [id, task] of due) {
        tasks.delete(id);
        task.fn();
      }
    },
  };
}

export interface Deferred<T> {
  promise: Promise<T>;
  resolve(value: T): void;
  reject(reason: unknown): void;
}

export function deferred<T>(): Deferred<T> {
  let resolve!: (value: T) => void;
  let reject!: (reason: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

/** Let settled promise callbacks run. */
export async function tick(): Promise<void> {
  await Promise.resolve();
  await Promise.resolve();
  await Promise.resolve();
}

/** API stub that parks every call as a deferred the test settles later. */
export function stubApi(): {
  api: ApiClient;
  suggestCalls: Array<Deferred<SuggestResponse> & { q: string; limit?: number }>;
  searchCalls: Array<Deferred<SearchResponse> & { q: string }>;
} {
  const suggestCalls: Array<Deferred<SuggestResponse> & { q: string; limit?: number }> = [];
  const searchCalls: Array<Deferred<SearchResponse> & { q: string }> = [];
  return {
    suggestCalls,
    searchCalls,
    api: {
      suggest(q, limit) {
        const d = deferred<SuggestResponse>();
        suggestCalls.push({ ...d, q, limit });
        return d.promise;
      },
      search(q) {
        const d = deferred<SearchResponse>();
        searchCalls.push({ ...d, q });
        return d.promise;
      },
    },
  };
}

export function suggestion(key: string, sku = 1): SuggestionRow {
  return { key, sku_id: sku, field_kind: "item_name" };
}

export function result(sku: number, part = `AAA-${10000 + sku}`): ResultRow {
  return {
    sku_id: sku,
    part_number: part,
    item_name: `Itm${sku}`,
    friendly_name: `Item ${sku}`,
    description: null,
    scores: { cosine: 0.5 },
    nlcs_score: 0.75,
    matched_field: "friendly_name",
  };
}

export function searchResponse(overrides: Partial<SearchResponse> = {}): SearchResponse {
  return {
    query: "q",
    branch: "hybrid",
    results: [],
    corrected_query: null,
    degraded: false,
    elapsed_ms: 4.2,
    ...overrides,
  };
}
