/** Pure HTML-string renderers over UiState. No ranking, no filtering:
 * rows render in exactly the order the service returned them.
 */

import type { SuggestionRow } from "./api.js";
import type { UiState } from "./controller.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const FIELD_LABELS: Record<SuggestionRow["field_kind"], string> = {
  part_number: "part number",
  item_name: "item name",
  friendly_name: "friendly name",
};

/** The suggestion key with the typed prefix wrapped in <mark>. */
export function highlightPrefix(key: string, typed: string): string {
  const prefix = typed.trim().toLowerCase();
  if (prefix && key.toLowerCase().startsWith(prefix)) {
    return (
      `<mark>${escapeHtml(key.slice(0, prefix.length))}</mark>` +
      escapeHtml(key.slice(prefix.length))
    );
  }
  return escapeHtml(key);
}

export function renderSuggestions(state: UiState): string {
  if (!state.dropdownVisible) return "";
  const rows = state.suggestions
    .map(
      (row, i) =>
        `<li class="suggestion" data-index="${i}" data-sku="${row.sku_id}">` +
        `<span class="key">${highlightPrefix(row.key, state.query)}</span>` +
        `<span class="badge badge-${row.field_kind}">${FIELD_LABELS[row.field_kind]}</span>` +
        `</li>`,
    )
    .join("");
  return `<ul class="suggestions" role="listbox">${rows}</ul>`;
}

function renderCard(row: UiState["results"][number]): string {
  const friendly = row.friendly_name
    ? `<p class="friendly">${escapeHtml(row.friendly_name)}</p>`
    : "";
  const description = row.description
    ? `<p class="description">${escapeHtml(row.description)}</p>`
    : "";
  const nlcs =
    row.nlcs_score !== null && row.nlcs_score !== undefined
      ? `<span class="nlcs">nlcs ${row.nlcs_score.toFixed(3)}</span>`
      : "";
  return (
    `<article class="card" data-sku="${row.sku_id}">` +
    `<header><span class="part">${escapeHtml(row.part_number)}</span>` +
    `<span class="item">${escapeHtml(row.item_name)}</span>${nlcs}</header>` +
    friendly +
    description +
    `</article>`
  );
}

export function renderResults(state: UiState): string {
  const pieces: string[] = [];
  if (state.suggestNotice) {
    pieces.push(`<p class="notice">${escapeHtml(state.suggestNotice)}</p>`);
  }
  if (state.searchError) {
    pieces.push(`<p class="error">${escapeHtml(state.searchError)}</p>`);
    return pieces.join("");
  }
  if (!state.searched) {
    return pieces.join("");
  }
  if (state.degraded) {
    pieces.push(
      `<p class="banner degraded">semantic matching is unavailable; ` +
        `showing text matches only</p>`,
    );
  }
  if (state.correctedQuery) {
    pieces.push(
      `<p class="corrected">showing results for ` +
        `&ldquo;${escapeHtml(state.correctedQuery)}&rdquo;</p>`,
    );
  }
  if (state.branch) {
    const label = state.branch === "part_number" ? "part number match" : "search";
    pieces.push(`<p class="branch branch-${state.branch}">${label}</p>`);
  }
  if (state.elapsedMs !== null) {
    pieces.push(`<p class="elapsed">${state.elapsedMs.toFixed(1)} ms</p>`);
  }
  if (state.results.length === 0) {
    pieces.push(
      `<p class="empty">No results for &ldquo;${escapeHtml(state.query)}&rdquo;.</p>`,
    );
  } else {
    pieces.push(
      `<div class="cards">${state.results.map(renderCard).join("")}</div>`,
    );
  }
  return pieces.join("");
}
