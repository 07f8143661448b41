import type {
  Candidate,
  CandidatesResponse,
  DiffView,
  HistoryEntry,
  SessionState,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const SAFETY_BADGES: Record<string, string> = {
  semantics_preserving: "preserving",
  thinning_risk: "thinning?",
  widening_risk: "widening?",
  lemma_conditional: "lemma",
};

export function safetyBadge(safety: string | null): string {
  if (!safety) return "";
  const label = SAFETY_BADGES[safety] ?? safety;
  return `<span class="badge badge-${escapeHtml(safety)}">${escapeHtml(label)}</span>`;
}

// Program pane: every body literal is a selectable span carrying its clause
// id and position, so the click handler needs no parsing.
export function renderProgram(state: SessionState, selected?: {
  clause: string;
  positions: number[];
}): string {
  const rows = state.clauses.map((clause) => {
    const chosen = selected && selected.clause === clause.id ? selected.positions : [];
    const body = clause.body
      .map((lit, i) => {
        const cls = chosen.includes(i) ? "literal selected" : "literal";
        return `<span class="${cls}" data-clause="${escapeHtml(clause.id)}" data-position="${i}">${escapeHtml(lit)}</span>`;
      })
      .join('<span class="comma">, </span>');
    const arrow = clause.body.length ? " :- " : "";
    return (
      `<div class="clause" data-clause="${escapeHtml(clause.id)}">` +
      `<span class="clause-id">${escapeHtml(clause.id)}</span>` +
      `<span class="head">${escapeHtml(clause.head)}</span>${arrow}${body}.` +
      `</div>`
    );
  });
  return `<div class="program" data-revision="${state.revision}">${rows.join("\n")}</div>`;
}

export function renderDiffSummary(diff: DiffView | null): string {
  if (!diff) return '<span class="diff pending">unverified</span>';
  const extra =
    diff.verdict === "equal"
      ? ""
      : ` (−${diff.missing.length}/+${diff.extra.length}${diff.imploded ? ", imploded" : ""})`;
  return `<span class="diff diff-${diff.verdict}">${diff.verdict}${escapeHtml(extra)}</span>`;
}

export function renderTimeline(state: SessionState): string {
  const items = state.history.map((entry: HistoryEntry) => {
    const current = entry.index === state.cursor ? " current" : "";
    const label = entry.rule ? escapeHtml(entry.rule) : "base program";
    return (
      `<li class="step${current}" data-index="${entry.index}">` +
      `<span class="step-no">${entry.index}</span> ${label} ` +
      `${safetyBadge(entry.safety)} ${renderDiffSummary(entry.diff)}` +
      `</li>`
    );
  });
  return `<ol class="timeline">${items.join("\n")}</ol>`;
}

function scoreMarks(candidate: Candidate): string {
  const s = candidate.scores;
  const mark = (flag: boolean, name: string) =>
    `<span class="score ${flag ? "on" : "off"}">${name}${flag ? " ✓" : " ✗"}</span>`;
  return [
    mark(s.enables_fold, "fold"),
    mark(s.well_founded, "well_founded"),
    mark(s.successful_path, "successful_path"),
    `<span class="score">coordination ${s.variable_coordination}</span>`,
    `<span class="score">size ${s.size_penalty}</span>`,
    s.unlinked ? '<span class="score demoted">unlinked</span>' : "",
    s.petitio_demoted ? '<span class="score demoted">petitio</span>' : "",
  ]
    .filter(Boolean)
    .join(" ");
}

// Candidate panel: entries strictly in server rank order.
export function renderCandidates(resp: CandidatesResponse | null): string {
  if (!resp) {
    return '<div class="candidates empty">select a clause to rank candidates</div>';
  }
  if (resp.candidates.length === 0) {
    return '<div class="candidates empty">no folder partially matches</div>';
  }
  const rows = resp.candidates.map(
    (c, i) =>
      `<li class="candidate" data-index="${i}" data-rank="${c.rank}">` +
      `<span class="rank">#${c.rank}</span> ` +
      `<span class="cand-literal">${escapeHtml(c.literal)}</span> ` +
      `<span class="cand-folder">via ${escapeHtml(c.folder.source)}:${escapeHtml(c.folder.clause)}</span>` +
      `<div class="scores">${scoreMarks(c)}</div>` +
      `<button class="accept" data-index="${i}">introduce + fold</button>` +
      `</li>`,
  );
  return `<ol class="candidates" data-clause="${escapeHtml(resp.clause)}">${rows.join("\n")}</ol>`;
}

// Direct-fold menu: only folds whose preconditions the server has already
// checked show up here, so every enabled action is known to be applicable.
export function renderFolds(resp: { clause: string; matches: FoldsResponseMatch[] } | null): string {
  if (!resp || resp.matches.length === 0) {
    return '<div class="folds empty">no direct fold applies</div>';
  }
  const rows = resp.matches.map(
    (m, i) =>
      `<li class="fold-match">` +
      `<span class="cand-literal">${escapeHtml(m.replacement)}</span> ` +
      `<span class="cand-folder">at ${m.positions.join(",")} via ` +
      `${escapeHtml(m.folder.source)}:${escapeHtml(m.folder.clause)}</span> ` +
      `<button class="fold-apply" data-index="${i}">fold</button>` +
      `</li>`,
  );
  return `<ol class="folds" data-clause="${escapeHtml(resp.clause)}">${rows.join("\n")}</ol>`;
}

interface FoldsResponseMatch {
  folder: { source: string; clause: string };
  positions: number[];
  replacement: string;
}

export function renderBanner(kind: "offline" | "conflict" | "error", text: string): string {
  return `<div class="banner banner-${kind}">${escapeHtml(text)}</div>`;
}
