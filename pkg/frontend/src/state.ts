// Queue model for the review screen. No DOM in here: everything is
// exercised directly by the unit tests.

import { DecisionResult, Filter, Unit, UnitPage } from "./types.js";

export const PAGE_SIZE = 50;

export function matchesFilter(unit: Unit, filter: Filter): boolean {
  if (filter.status === "needs_review" && !unit.needs_review) return false;
  if (filter.status && filter.status !== "needs_review" && unit.status !== filter.status)
    return false;
  if (filter.docKey && unit.doc_key !== filter.docKey) return false;
  return true;
}

export class QueueState {
  units: Unit[] = [];
  total = 0;
  page = 1;
  pageSize = PAGE_SIZE;
  filter: Filter = { status: "needs_review", docKey: "", sort: "position" };
  selected = -1;

  load(data: UnitPage): void {
    this.units = data.units;
    this.total = data.total;
    this.page = data.page;
    this.pageSize = data.page_size;
    this.selected = this.units.length ? Math.min(Math.max(this.selected, 0), this.units.length - 1) : -1;
  }

  current(): Unit | null {
    return this.selected >= 0 && this.selected < this.units.length
      ? this.units[this.selected]
      : null;
  }

  select(tuId: string): boolean {
    const i = this.units.findIndex((u) => u.tu_id === tuId);
    if (i < 0) return false;
    this.selected = i;
    return true;
  }

  move(delta: number): Unit | null {
    if (!this.units.length) return null;
    this.selected = Math.min(this.units.length - 1, Math.max(0, this.selected + delta));
    return this.current();
  }

  pageCount(): number {
    return Math.max(1, Math.ceil(this.total / this.pageSize));
  }

  /** Fold a decision result into the local list.
   *
   * Returns true when the queue must be refetched (split created units
   * whose queue positions only the server knows). Removed units and
   * units that stopped matching the active filter are dropped locally;
   * the selection stays on the same slot so the next unit slides in.
   */
  applyResult(result: DecisionResult): boolean {
    if (!result.applied) return false;
    if (result.created && result.created.length) return true;
    const drop = new Set(result.removed ?? []);
    if (result.unit) {
      const i = this.units.findIndex((u) => u.tu_id === result.unit!.tu_id);
      if (i >= 0) {
        if (matchesFilter(result.unit, this.filter)) this.units[i] = result.unit;
        else drop.add(result.unit.tu_id);
      }
    }
    if (drop.size) {
      this.units = this.units.filter((u) => !drop.has(u.tu_id));
      this.total -= drop.size;
      this.selected = this.units.length
        ? Math.min(this.selected, this.units.length - 1)
        : -1;
    }
    return false;
  }
}

export function formatConfidence(confidence: number): string {
  return confidence.toFixed(2);
}

export function confidenceClass(unit: Unit): string {
  if (unit.status !== "auto") return "conf-decided";
  return unit.needs_review ? "conf-low" : "conf-ok";
}
