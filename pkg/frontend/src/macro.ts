import type { Api } from "./api.js";
import type { Candidate, SessionState } from "./types.js";

// The abductive-folding macro: one goal introduction immediately followed by
// the fold it enables.  Both steps land in the timeline; the submitted
// literal, position, folder and rank fingerprint are exactly the candidate's
// recorded fields, never recomputed locally.
export async function abductiveFolding(
  api: Api,
  state: SessionState,
  clause: string,
  candidate: Candidate,
): Promise<SessionState> {
  const introduced = await api.apply(state.session, state.revision, {
    rule: "introduce_goal",
    clause,
    literal: candidate.literal,
    position: candidate.insert_position,
    candidate: {
      rank: candidate.rank,
      literal: candidate.literal,
      folders: [candidate.folder],
    },
  });
  return api.apply(introduced.session, introduced.revision, {
    rule: "fold",
    clause,
    positions: candidate.fold_positions,
    folder: candidate.folder,
  });
}
