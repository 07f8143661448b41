// Browser wiring: two panes (program left; timeline, candidates and
// verification right), optimistic revision tokens, explicit verify button.
// All transformation logic lives on the server; this file only moves JSON.

import { ConnectionLostError, HttpApi, RevisionConflictError, RuleRejectedError } from "./api.js";
import { abductiveFolding } from "./macro.js";
import {
  renderBanner,
  renderCandidates,
  renderFolds,
  renderProgram,
  renderTimeline,
} from "./render.js";
import type { CandidatesResponse, FoldsResponse, SessionState } from "./types.js";

const params = new URLSearchParams(window.location.search);
const api = new HttpApi(params.get("api") ?? "http://127.0.0.1:8731");

let state: SessionState | null = null;
let panel: CandidatesResponse | null = null;
let folds: FoldsResponse | null = null;
let selectedClause: string | null = null;
let frozen = false;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function draw() {
  if (!state) return;
  el("program").innerHTML = renderProgram(
    state,
    selectedClause ? { clause: selectedClause, positions: [] } : undefined,
  );
  el("timeline").innerHTML = renderTimeline(state);
  el("candidates").innerHTML = renderCandidates(panel);
  el("folds").innerHTML = renderFolds(folds);
  (el("undo") as HTMLButtonElement).disabled = frozen || !state.can_undo;
  (el("redo") as HTMLButtonElement).disabled = frozen || !state.can_redo;
  (el("verify") as HTMLButtonElement).disabled = frozen || state.cursor === 0;
}

function showBanner(kind: "offline" | "conflict" | "error", text: string) {
  el("banner").innerHTML = renderBanner(kind, text);
}

function clearBanner() {
  el("banner").innerHTML = "";
}

async function refresh() {
  if (!state) return;
  state = await api.getSession(state.session);
  draw();
}

// Every mutating action funnels through here so conflict and connection
// handling stay uniform: a stale revision refreshes the view, a lost
// connection freezes it read-only.
async function guarded(action: () => Promise<void>) {
  if (frozen) return;
  try {
    await action();
    clearBanner();
  } catch (err) {
    if (err instanceof RevisionConflictError) {
      showBanner("conflict", `someone moved first: ${err.message}; view refreshed`);
      await refresh();
    } else if (err instanceof ConnectionLostError) {
      frozen = true;
      showBanner("offline", "connection lost; view frozen read-only");
    } else if (err instanceof RuleRejectedError) {
      showBanner("error", `${err.kind}: ${err.message}`);
    } else {
      throw err;
    }
  }
  draw();
}

async function selectClause(clauseId: string) {
  selectedClause = clauseId;
  panel = null;
  folds = null;
  draw();
  await guarded(async () => {
    if (!state) return;
    panel = await api.candidates(state.session, clauseId);
    folds = await api.folds(state.session, clauseId);
  });
}

function wire() {
  el("program").addEventListener("click", (ev) => {
    const target = (ev.target as HTMLElement).closest("[data-clause]");
    if (target) void selectClause(target.getAttribute("data-clause")!);
  });

  el("candidates").addEventListener("click", (ev) => {
    const button = (ev.target as HTMLElement).closest("button.accept");
    if (!button || !panel || !state || !selectedClause) return;
    const candidate = panel.candidates[Number(button.getAttribute("data-index"))];
    void guarded(async () => {
      state = await abductiveFolding(api, state!, selectedClause!, candidate);
      panel = null;
      folds = null;
      selectedClause = null;
    });
  });

  el("folds").addEventListener("click", (ev) => {
    const button = (ev.target as HTMLElement).closest("button.fold-apply");
    if (!button || !folds || !state || !selectedClause) return;
    const m = folds.matches[Number(button.getAttribute("data-index"))];
    void guarded(async () => {
      state = await api.apply(state!.session, state!.revision, {
        rule: "fold",
        clause: selectedClause!,
        positions: m.positions,
        folder: m.folder,
      });
      panel = null;
      folds = null;
      selectedClause = null;
    });
  });

  el("undo").addEventListener("click", () =>
    guarded(async () => {
      state = await api.undo(state!.session, state!.revision);
    }),
  );
  el("redo").addEventListener("click", () =>
    guarded(async () => {
      state = await api.redo(state!.session, state!.revision);
    }),
  );
  el("verify").addEventListener("click", () =>
    guarded(async () => {
      await api.verifyStep(state!.session, state!.cursor);
      await refresh();
    }),
  );

  el("open").addEventListener("click", () =>
    guarded(async () => {
      const base = (el("base") as HTMLInputElement).value || "naive_sort";
      state = await api.createSession(base);
      panel = null;
      folds = null;
      selectedClause = null;
    }),
  );
}

wire();
draw();
