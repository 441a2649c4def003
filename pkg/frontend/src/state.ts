/** In-memory view state; nothing here is ever persisted server-side.
 *
 * Pending label edits must be flushed or discarded before navigating to
 * another cluster; `navigate` enforces that invariant.
 */

export interface PendingEdit {
  kind: "cluster" | "image";
  clusterId?: number;
  imageId?: string;
  label: string;
}

export interface ViewState {
  selectedCluster: number | null;
  page: number;
  pendingEdits: PendingEdit[];
  bandFilter: number | null;
}

export function initialState(): ViewState {
  return { selectedCluster: null, page: 0, pendingEdits: [], bandFilter: null };
}

export class PendingEditsError extends Error {
  constructor() {
    super("pending label edits must be flushed or discarded before navigating");
  }
}

export function navigate(state: ViewState, cluster: number | null): ViewState {
  if (state.pendingEdits.length > 0) throw new PendingEditsError();
  return { ...state, selectedCluster: cluster, page: 0 };
}

export function setPage(state: ViewState, page: number): ViewState {
  if (page < 0) throw new RangeError(`page must be >= 0, got ${page}`);
  return { ...state, page };
}

export function stageEdit(state: ViewState, edit: PendingEdit): ViewState {
  if (!edit.label.trim()) throw new RangeError("label must be non-empty");
  // a newer edit for the same target replaces the older one
  const rest = state.pendingEdits.filter(
    (e) =>
      !(
        e.kind === edit.kind &&
        e.clusterId === edit.clusterId &&
        e.imageId === edit.imageId
      ),
  );
  return { ...state, pendingEdits: [...rest, edit] };
}

export function discardEdits(state: ViewState): ViewState {
  return { ...state, pendingEdits: [] };
}

/** Hand the staged edits to the caller for submission and clear them. */
export function takeEdits(state: ViewState): { state: ViewState; edits: PendingEdit[] } {
  return { state: { ...state, pendingEdits: [] }, edits: state.pendingEdits };
}

export function setBandFilter(state: ViewState, band: number | null): ViewState {
  if (band !== null && band < 0) throw new RangeError("band must be >= 0");
  return { ...state, bandFilter: band };
}
