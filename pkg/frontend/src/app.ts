// DOM wiring for the review screen: a filterable queue on the left, the
// selected unit's editor on the right, decisions sent over the API.

import { ApiError, ReviewClient } from "./api.js";
import { QueueState, confidenceClass, formatConfidence } from "./state.js";
import { Decision, Stats, StatusFilter, Unit } from "./types.js";

function esc(text: string): string {
  const div = document.createElement("div");
  div.textContent = text;
  return div.innerHTML;
}

export class ReviewApp {
  private state = new QueueState();

  constructor(private client: ReviewClient, private root: Document = document) {}

  private el<T extends HTMLElement>(id: string): T {
    const element = this.root.getElementById(id);
    if (!element) throw new Error(`missing element #${id}`);
    return element as T;
  }

  async start(): Promise<void> {
    this.bindControls();
    this.bindKeys();
    (this.el<HTMLAnchorElement>("exportLink")).href = this.client.exportUrl();
    await this.reload();
  }

  private bindControls(): void {
    this.el<HTMLSelectElement>("filterStatus").addEventListener("change", (e) => {
      this.state.filter.status = (e.target as HTMLSelectElement).value as StatusFilter;
      this.state.page = 1;
      void this.reload();
    });
    this.el<HTMLInputElement>("filterDoc").addEventListener("change", (e) => {
      this.state.filter.docKey = (e.target as HTMLInputElement).value.trim();
      this.state.page = 1;
      void this.reload();
    });
    this.el<HTMLSelectElement>("filterSort").addEventListener("change", (e) => {
      this.state.filter.sort = (e.target as HTMLSelectElement).value as "position" | "confidence";
      void this.reload();
    });
    this.el("prevPage").addEventListener("click", () => void this.turnPage(-1));
    this.el("nextPage").addEventListener("click", () => void this.turnPage(1));
    this.el("btnAccept").addEventListener("click", () => void this.decide({ action: "accept" }));
    this.el("btnReject").addEventListener("click", () => void this.decide({ action: "reject" }));
    this.el("btnSave").addEventListener("click", () => void this.saveEdit());
    this.el("btnMerge").addEventListener("click", () => void this.mergeWithNext());
    this.el("btnSplit").addEventListener("click", () => void this.splitAtCursors());
  }

  private bindKeys(): void {
    this.root.addEventListener("keydown", (e) => {
      const target = e.target as HTMLElement;
      const typing = target instanceof HTMLInputElement || target instanceof HTMLTextAreaElement;
      if (typing) {
        if (e.key === "Escape") target.blur();
        if (e.key === "Enter" && (e.ctrlKey || e.metaKey)) void this.saveEdit();
        return;
      }
      switch (e.key) {
        case "j":
        case "ArrowDown":
          e.preventDefault();
          this.state.move(1);
          this.render();
          break;
        case "k":
        case "ArrowUp":
          e.preventDefault();
          this.state.move(-1);
          this.render();
          break;
        case "a":
          void this.decide({ action: "accept" });
          break;
        case "x":
          void this.decide({ action: "reject" });
          break;
        case "e":
          this.el<HTMLTextAreaElement>("srcText").focus();
          break;
        case "m":
          void this.mergeWithNext();
          break;
      }
    });
  }

  private async turnPage(delta: number): Promise<void> {
    const page = Math.min(this.state.pageCount(), Math.max(1, this.state.page + delta));
    if (page === this.state.page) return;
    this.state.page = page;
    await this.reload();
  }

  async reload(): Promise<void> {
    try {
      const data = await this.client.listUnits(
        this.state.filter, this.state.page, this.state.pageSize);
      this.state.load(data);
      this.render();
      await this.refreshStats();
    } catch (err) {
      this.say(err instanceof Error ? err.message : String(err), true);
    }
  }

  private async refreshStats(): Promise<void> {
    const stats = await this.client.stats();
    this.el("statsBar").innerHTML = this.statsLine(stats);
  }

  private statsLine(stats: Stats): string {
    const counts = stats.status_counts;
    return (
      `<b>${stats.tu_count}</b> TUs · ${stats.src_words}/${stats.tgt_words} words ` +
      `· rates ${stats.src_rate}/${stats.tgt_rate} ` +
      `· <span class="conf-low">${stats.needs_review} to review</span> ` +
      `· ${counts.confirmed} confirmed, ${counts.edited} edited, ${counts.rejected} rejected`
    );
  }

  private render(): void {
    this.renderQueue();
    this.renderDetail();
  }

  private renderQueue(): void {
    const list = this.el("queueList");
    if (!this.state.units.length) {
      list.innerHTML = '<li class="queue-empty">nothing matches the filter</li>';
    } else {
      list.innerHTML = this.state.units
        .map((unit, i) => this.queueRow(unit, i === this.state.selected))
        .join("");
      list.querySelectorAll("li[data-id]").forEach((li) => {
        li.addEventListener("click", () => {
          this.state.select((li as HTMLElement).dataset.id!);
          this.render();
        });
      });
    }
    this.el("pageInfo").textContent =
      `page ${this.state.page}/${this.state.pageCount()} · ${this.state.total} units`;
  }

  private queueRow(unit: Unit, selected: boolean): string {
    return (
      `<li data-id="${esc(unit.tu_id)}" class="${selected ? "selected" : ""}">` +
      `<span class="badge ${confidenceClass(unit)}">${formatConfidence(unit.confidence)}</span>` +
      `<span class="row-id">${esc(unit.tu_id)}</span>` +
      `<span class="row-status">${unit.status}</span>` +
      `<div class="row-text">${esc(unit.src_text)}</div></li>`
    );
  }

  private renderDetail(): void {
    const unit = this.state.current();
    const pane = this.el("detailPane");
    const empty = this.el("detailEmpty");
    if (!unit) {
      pane.classList.add("hidden");
      empty.classList.remove("hidden");
      return;
    }
    pane.classList.remove("hidden");
    empty.classList.add("hidden");
    this.el("unitId").textContent = unit.tu_id;
    this.el("unitMeta").innerHTML =
      `${esc(unit.doc_key)} · bead ${esc(unit.bead_type)} · ` +
      `<span class="badge ${confidenceClass(unit)}">${formatConfidence(unit.confidence)}</span> · ` +
      `${unit.status}${unit.needs_review ? ' · <span class="conf-low">needs review</span>' : ""}`;
    this.el<HTMLTextAreaElement>("srcText").value = unit.src_text;
    this.el<HTMLTextAreaElement>("tgtText").value = unit.tgt_text;
  }

  private say(message: string, isError = false): void {
    const box = this.el("msgBox");
    box.textContent = message;
    box.className = isError ? "msg error" : "msg";
  }

  private async decide(decision: Decision): Promise<void> {
    const unit = this.state.current();
    if (!unit) return;
    try {
      const result = await this.client.decide(unit.tu_id, decision);
      if (!result.applied) {
        this.say(`not applied: ${result.reason ?? "unknown reason"}`, true);
        return;
      }
      this.say(`${decision.action} ${unit.tu_id}`);
      if (this.state.applyResult(result)) {
        await this.reload();
      } else {
        this.render();
        await this.refreshStats();
      }
    } catch (err) {
      this.say(err instanceof ApiError ? err.message : String(err), true);
    }
  }

  private async saveEdit(): Promise<void> {
    const unit = this.state.current();
    if (!unit) return;
    await this.decide({
      action: "edit",
      src_text: this.el<HTMLTextAreaElement>("srcText").value,
      tgt_text: this.el<HTMLTextAreaElement>("tgtText").value,
    });
  }

  private async mergeWithNext(): Promise<void> {
    const unit = this.state.current();
    if (!unit) return;
    // the merge partner is the next unit in corpus order, which the
    // filtered queue may not contain; the server knows
    const envelope = await this.client.getUnit(unit.tu_id);
    if (!envelope.next) {
      this.say("no following unit to merge with", true);
      return;
    }
    await this.decide({ action: "merge", with_tu_id: envelope.next });
  }

  private async splitAtCursors(): Promise<void> {
    const src = this.el<HTMLTextAreaElement>("srcText");
    const tgt = this.el<HTMLTextAreaElement>("tgtText");
    await this.decide({
      action: "split",
      src_boundary: src.selectionStart ?? 0,
      tgt_boundary: tgt.selectionStart ?? 0,
    });
  }
}
