/** DOM wiring for the planner console. All state lives in PlannerSession;
 * this module only reads inputs and renders payloads.
 */

import { ApiError, ContextTriple, RegistryClient } from "./api.js";
import { candidateSummary, detailBadge, variantRows } from "./render.js";
import { PlannerSession } from "./session.js";

const client = new RegistryClient("");
const session = new PlannerSession(client);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

function showError(err: unknown): void {
  const box = el<HTMLElement>("errors");
  if (err instanceof ApiError && err.violations.length > 0) {
    box.textContent = err.violations.join("\n");
  } else {
    box.textContent = String(err instanceof Error ? err.message : err);
  }
}

function clearError(): void {
  el<HTMLElement>("errors").textContent = "";
}

function parseContext(text: string): ContextTriple[] {
  // one triple per line: object predicate subject
  return text
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0)
    .map((line) => {
      const parts = line.split(/\s+/);
      if (parts.length !== 3) throw new Error(`context line needs 3 terms: ${line}`);
      return [parts[0], parts[1], parts[2]] as ContextTriple;
    });
}

function renderRoleEditors(): void {
  const host = el<HTMLElement>("roles");
  host.innerHTML = "";
  for (const [role, source] of Object.entries(session.draft.classSources)) {
    const block = document.createElement("fieldset");
    const legend = document.createElement("legend");
    legend.textContent = role;
    block.appendChild(legend);

    const editor = document.createElement("textarea");
    editor.rows = 6;
    editor.value = source;
    editor.addEventListener("input", () => {
      session.editClassSource(role, editor.value);
      renderInceptGate();
    });
    block.appendChild(editor);

    const weights = document.createElement("div");
    for (const [leaf, weight] of Object.entries(session.draft.weights[role] ?? {})) {
      const label = document.createElement("label");
      label.textContent = `w[${leaf}] `;
      const slider = document.createElement("input");
      slider.type = "range";
      slider.min = "0.05";
      slider.max = "5";
      slider.step = "0.05";
      slider.value = String(weight);
      slider.addEventListener("change", () => {
        session.editWeight(role, leaf, Number(slider.value));
        renderInceptGate();
        void runSearch(role);
      });
      label.appendChild(slider);
      weights.appendChild(label);
    }
    block.appendChild(weights);

    const searchButton = document.createElement("button");
    searchButton.textContent = "search";
    searchButton.addEventListener("click", () => void runSearch(role));
    block.appendChild(searchButton);

    const results = document.createElement("div");
    results.id = `search-${role}`;
    block.appendChild(results);
    host.appendChild(block);
  }
}

async function runSearch(role: string): Promise<void> {
  clearError();
  try {
    const response = await session.search(role);
    const host = el<HTMLElement>(`search-${role}`);
    host.innerHTML = "";
    if (response.relaxationSuggested) {
      const note = document.createElement("p");
      note.textContent = "no instances; consider relaxing the requirements";
      host.appendChild(note);
    }
    const table = document.createElement("table");
    for (const result of response.results) {
      const row = table.insertRow();
      row.insertCell().textContent = result.org;
      row.insertCell().textContent = String(result.score);
      row.insertCell().textContent = result.isInstance ? "instance" : "-";
      row.insertCell().textContent = result.requirements
        .map((r) => `${r.path}:${detailBadge(r.detail)}`)
        .join(" ");
    }
    host.appendChild(table);
  } catch (err) {
    showError(err);
  }
}

async function refreshCandidates(): Promise<void> {
  clearError();
  try {
    const verify = el<HTMLInputElement>("verify").checked;
    const response = await session.refreshCandidates(verify);
    const host = el<HTMLElement>("candidates");
    host.innerHTML = "";
    for (const [role, rc] of Object.entries(response.roles)) {
      const line = document.createElement("p");
      line.textContent = candidateSummary(role, rc);
      host.appendChild(line);
    }
  } catch (err) {
    showError(err);
  }
}

async function regenerate(): Promise<void> {
  clearError();
  try {
    session.setContext(parseContext(el<HTMLTextAreaElement>("context").value));
    await session.regenerateVariants();
    const host = el<HTMLElement>("variants");
    host.innerHTML = "";
    const table = document.createElement("table");
    const head = table.insertRow();
    for (const title of ["#", "assignment", "competence", "social", "cost", "duration", ""]) {
      const cell = document.createElement("th");
      cell.textContent = title;
      head.appendChild(cell);
    }
    for (const row of variantRows(session.lastVariantsText ?? "")) {
      const tr = table.insertRow();
      tr.insertCell().textContent = String(row.index);
      tr.insertCell().textContent = row.assignment;
      tr.insertCell().textContent = row.competenceScore;
      tr.insertCell().textContent = row.socialScore;
      tr.insertCell().textContent = row.totalCost;
      tr.insertCell().textContent = row.totalDuration;
      const last = tr.insertCell();
      if (row.socialViolation) {
        const badge = document.createElement("span");
        badge.textContent = "social violation";
        badge.className = "badge";
        last.appendChild(badge);
      }
      const pick = document.createElement("button");
      pick.textContent = "incept";
      pick.disabled = !session.canIncept;
      pick.addEventListener("click", () => void runIncept(row.index));
      last.appendChild(pick);
    }
    host.appendChild(table);
    renderInceptGate();
  } catch (err) {
    showError(err);
  }
}

async function runIncept(index: number): Promise<void> {
  clearError();
  if (!window.confirm(`Incept variant ${index} as a new VO?`)) return;
  try {
    const response = await session.incept(index);
    el<HTMLElement>("banner").textContent = `incepted ${response.voId}`;
  } catch (err) {
    showError(err);
  }
}

function renderInceptGate(): void {
  const note = el<HTMLElement>("incept-state");
  note.textContent = session.dirty
    ? "unsaved edits: save the spec before incepting"
    : "";
  for (const button of document.querySelectorAll<HTMLButtonElement>("#variants button")) {
    button.disabled = !session.canIncept;
  }
}

async function saveSpec(): Promise<void> {
  clearError();
  try {
    await session.save();
    renderRoleEditors();
    renderInceptGate();
  } catch (err) {
    showError(err);
  }
}

async function boot(): Promise<void> {
  const specId = el<HTMLInputElement>("spec-id").value;
  try {
    await session.load(specId);
    renderRoleEditors();
    renderInceptGate();
  } catch (err) {
    showError(err);
  }
}

el<HTMLButtonElement>("load").addEventListener("click", () => void boot());
el<HTMLButtonElement>("save").addEventListener("click", () => void saveSpec());
el<HTMLButtonElement>("candidates-btn").addEventListener("click", () => void refreshCandidates());
el<HTMLButtonElement>("variants-btn").addEventListener("click", () => void regenerate());
