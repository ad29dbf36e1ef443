import { describe, expect, it } from "vitest";

import { createController, type UiState } from "../src/controller.js";
import { createDebouncer } from "../src/debounce.js";
import { ApiError } from "../src/api.js";
import {
  manualClock,
  result,
  searchResponse,
  stubApi,
  suggestion,
  tick,
} from "./helpers.js";

function setup() {
  const clock = manualClock();
  const { api, suggestCalls, searchCalls } = stubApi();
  const frames: string[] = [];
  const controller = createController({
    api,
    debouncer: createDebouncer(clock, 75),
    onChange: (state: UiState) => frames.push(JSON.stringify(state)),
  });
  return { clock, suggestCalls, searchCalls, controller, frames };
}

describe("suggestion staleness", () => {
  it("an older response arriving after a newer one is discarded", async () => {
    const { clock, suggestCalls, controller } = setup();

    controller.handleInput("sr");
    clock.advance(75);
    controller.handleInput("srf");
    clock.advance(75);
    expect(suggestCalls).toHaveLength(2);

    suggestCalls[1]!.resolve({ suggestions: [suggestion("srflpt4")], elapsed_ms: 1 });
    await tick();
    expect(controller.state.suggestions.map((s) => s.key)).toEqual(["srflpt4"]);

    suggestCalls[0]!.resolve({ suggestions: [suggestion("srf-old")], elapsed_ms: 9 });
    await tick();
    expect(controller.state.suggestions.map((s) => s.key)).toEqual(["srflpt4"]);
  });

  it("a response older than the latest issued request never lands, even first", async () => {
    const { clock, suggestCalls, controller, frames } = setup();

    controller.handleInput("sr");
    clock.advance(75);
    controller.handleInput("srf");
    clock.advance(75);

    suggestCalls[0]!.resolve({ suggestions: [suggestion("sr-old")], elapsed_ms: 1 });
    await tick();
    expect(controller.state.suggestions).toEqual([]);
    expect(frames.some((f) => f.includes("sr-old"))).toBe(false);

    suggestCalls[1]!.resolve({ suggestions: [suggestion("srf-new")], elapsed_ms: 1 });
    await tick();
    expect(controller.state.suggestions.map((s) => s.key)).toEqual(["srf-new"]);
  });

  it("suggestions left over from typing never resurface after clearing", async () => {
    const { clock, suggestCalls, controller } = setup();

    controller.handleInput("sr");
    clock.advance(75);
    controller.handleInput("");
    suggestCalls[0]!.resolve({ suggestions: [suggestion("sr")], elapsed_ms: 1 });
    await tick();
    expect(controller.state.suggestions).toEqual([]);
    expect(controller.state.dropdownVisible).toBe(false);
  });
});

describe("search staleness and rendering state", () => {
  it("stale search responses never overwrite newer results", async () => {
    const { searchCalls, controller, frames } = setup();

    controller.handleInput("first");
    controller.submitSearch();
    controller.handleInput("second");
    controller.submitSearch();
    expect(searchCalls.map((c) => c.q)).toEqual(["first", "second"]);

    searchCalls[1]!.resolve(searchResponse({ query: "second", results: [result(2)] }));
    await tick();
    expect(controller.state.results.map((r) => r.sku_id)).toEqual([2]);

    searchCalls[0]!.resolve(searchResponse({ query: "first", results: [result(1)] }));
    await tick();
    expect(controller.state.results.map((r) => r.sku_id)).toEqual([2]);
    expect(frames.filter((f) => f.includes('"Itm1"'))).toHaveLength(0);
  });

  it("result order is exactly the service order", async () => {
    const { searchCalls, controller } = setup();
    controller.handleInput("mixed");
    controller.submitSearch();
    searchCalls[0]!.resolve(
      searchResponse({ results: [result(9), result(2), result(5)] }),
    );
    await tick();
    expect(controller.state.results.map((r) => r.sku_id)).toEqual([9, 2, 5]);
  });

  it("selecting a suggestion fills the input and searches immediately", async () => {
    const { clock, suggestCalls, searchCalls, controller } = setup();

    controller.handleInput("srf");
    clock.advance(75);
    suggestCalls[0]!.resolve({
      suggestions: [suggestion("srflpt413ini7/16/512", 17)],
      elapsed_ms: 1,
    });
    await tick();

    controller.selectSuggestion(0);
    expect(controller.state.query).toBe("srflpt413ini7/16/512");
    expect(controller.state.dropdownVisible).toBe(false);
    expect(searchCalls.map((c) => c.q)).toEqual(["srflpt413ini7/16/512"]);

    searchCalls[0]!.resolve(
      searchResponse({ branch: "hybrid", results: [result(17)] }),
    );
    await tick();
    expect(controller.state.results.map((r) => r.sku_id)).toEqual([17]);
  });

  it("service errors surface as readable text, not a blank page", async () => {
    const { searchCalls, controller } = setup();
    controller.handleInput("anything");
    controller.submitSearch();
    searchCalls[0]!.reject(new ApiError(503, "not_ready", "index rebuild in progress"));
    await tick();
    expect(controller.state.searchError).toBe("index rebuild in progress");
    expect(controller.state.results).toEqual([]);
  });

  it("suggest failures show a notice while typing keeps working", async () => {
    const { clock, suggestCalls, controller } = setup();
    controller.handleInput("sr");
    clock.advance(75);
    suggestCalls[0]!.reject(new Error("connection refused"));
    await tick();
    expect(controller.state.suggestNotice).toContain("connection refused");

    controller.handleInput("srf");
    clock.advance(75);
    expect(suggestCalls).toHaveLength(2);
  });

  it("whitespace-only queries are never submitted", () => {
    const { searchCalls, controller } = setup();
    controller.handleInput("   ");
    controller.submitSearch();
    expect(searchCalls).toHaveLength(0);
  });
});
