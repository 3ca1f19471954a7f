import { ApiError, BandServiceClient, bandsNested, type BandsPayload } from "./api.js";
import { bandChart, regionChart } from "./charts.js";
import {
  RequestTracker,
  initialState,
  matchesSelection,
  selectionChanged,
  validateDraft,
  withBands,
  withError,
  withRegion,
  withWhatIf,
  type Alpha,
  type ViewState,
} from "./state.js";

function apiBase(): string {
  const fromQuery = new URLSearchParams(location.search).get("api");
  if (fromQuery) return fromQuery.replace(/\/$/, "");
  return "";
}

const client = new BandServiceClient(apiBase());
const tracker = new RequestTracker();
let state: ViewState = initialState();
// Nesting check cache: bands payloads per alpha for the selected day.
const bandsByAlpha = new Map<string, BandsPayload>();

const el = (id: string) => document.getElementById(id) as HTMLElement;

function render() {
  const offerPanel = el("offer-chart");
  const demandPanel = el("demand-chart");
  const regionPanel = el("region-chart");
  if (state.bands && matchesSelection(state, state.bands)) {
    offerPanel.innerHTML = bandChart(state.bands, "offer");
    demandPanel.innerHTML = bandChart(state.bands, "demand");
  } else {
    offerPanel.innerHTML = `<p class="placeholder">loading offer band...</p>`;
    demandPanel.innerHTML = `<p class="placeholder">loading demand band...</p>`;
  }
  if (state.region && matchesSelection(state, state.region)) {
    const modified =
      state.whatIf && matchesSelection(state, state.whatIf.base) ? state.whatIf.modified : null;
    regionPanel.innerHTML = regionChart(state.region, modified);
  } else {
    regionPanel.innerHTML = `<p class="placeholder">loading region...</p>`;
  }
  const toast = el("toast");
  toast.textContent = state.error ?? "";
  toast.classList.toggle("visible", state.error !== null);
}

function setState(next: ViewState) {
  state = next;
  render();
}

async function refresh() {
  const { day, alpha } = state;
  if (!day) return;
  const bandsSeq = tracker.next("bands");
  const regionSeq = tracker.next("region");
  try {
    const bands = await client.bands(day, alpha);
    if (tracker.isCurrent("bands", bandsSeq)) {
      setState(withBands(state, bands));
      bandsByAlpha.set(`${day}:${alpha}`, bands);
      checkNesting(day);
    }
  } catch (err) {
    if (tracker.isCurrent("bands", bandsSeq)) setState(withError(state, describe(err)));
  }
  try {
    const region = await client.region(day, alpha);
    if (tracker.isCurrent("region", regionSeq)) setState(withRegion(state, region));
  } catch (err) {
    if (tracker.isCurrent("region", regionSeq)) setState(withError(state, describe(err)));
  }
}

function checkNesting(day: string) {
  const wide = bandsByAlpha.get(`${day}:0.25`);
  const narrow = bandsByAlpha.get(`${day}:0.5`);
  if (wide && narrow && !bandsNested(wide, narrow)) {
    console.error("band nesting violated between confidence levels", { day });
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return String(err);
}

function onSelectionChange() {
  const day = (el("day-select") as HTMLSelectElement).value;
  const alpha = (el("alpha-select") as HTMLSelectElement).value as Alpha;
  setState(selectionChanged(state, day, alpha));
  void refresh();
}

async function onWhatIfSubmit(event: Event) {
  event.preventDefault();
  const draft = {
    side: (el("wi-side") as HTMLSelectElement).value as "offer" | "demand",
    price: Number((el("wi-price") as HTMLInputElement).value),
    qty: Number((el("wi-qty") as HTMLInputElement).value),
  };
  const problem = validateDraft(draft);
  if (problem) {
    setState(withError(state, problem));
    return;
  }
  if (!state.day) return;
  const seq = tracker.next("whatif");
  try {
    const payload = await client.whatIf(state.day, state.alpha, draft.side, draft.price, draft.qty);
    if (tracker.isCurrent("whatif", seq)) {
      setState({ ...withWhatIf(state, payload), error: null });
    }
  } catch (err) {
    // Keep the prior view; just surface the problem.
    if (tracker.isCurrent("whatif", seq)) setState(withError(state, describe(err)));
  }
}

function onClearWhatIf() {
  setState({ ...state, whatIf: null, error: null });
}

async function boot() {
  try {
    const days = await client.days();
    const daySelect = el("day-select") as HTMLSelectElement;
    daySelect.innerHTML = days.days
      .map((d) => `<option value="${d}">${d}</option>`)
      .join("");
    const alphaSelect = el("alpha-select") as HTMLSelectElement;
    const alphas = days.alphas.filter((a) => a === "0.25" || a === "0.5");
    alphaSelect.innerHTML = (alphas.length ? alphas : ["0.25", "0.5"])
      .map((a) => `<option value="${a}">${(1 - Number(a)).toFixed(2)}</option>`)
      .join("");
    setState({ ...state, days: days.days });
    daySelect.addEventListener("change", onSelectionChange);
    alphaSelect.addEventListener("change", onSelectionChange);
    el("whatif-form").addEventListener("submit", onWhatIfSubmit);
    el("wi-clear").addEventListener("click", onClearWhatIf);
    window.addEventListener("resize", render); // redraw from cache, no refetch
    onSelectionChange();
  } catch (err) {
    setState(withError(state, `failed to load available days: ${describe(err)}`));
  }
}

void boot();
