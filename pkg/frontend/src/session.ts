/** Planner session state: draft edits against a stored spec, the latest
 * candidate and variant payloads, and the dirty flag that gates inception.
 *
 * The session never recomputes scores or orderings; it stores the server's
 * payloads verbatim and the UI renders them as-is.
 */

import {
  ApiError,
  CandidatesResponse,
  ContextTriple,
  InceptResponse,
  PreferenceOverrides,
  RegistryClient,
  SearchResponse,
} from "./api.js";

export interface Draft {
  classSources: Record<string, string>;
  weights: Record<string, Record<string, number>>;
  context: ContextTriple[];
  preferences: PreferenceOverrides;
}

function clone<T>(value: T): T {
  return JSON.parse(JSON.stringify(value)) as T;
}

export class PlannerSession {
  specId = "";
  private stored: Draft | null = null;
  draft: Draft = { classSources: {}, weights: {}, context: [], preferences: {} };
  lastSearch: Record<string, SearchResponse> = {};
  lastCandidates: CandidatesResponse | null = null;
  lastVariantsText: string | null = null;
  lastError: ApiError | null = null;

  constructor(private readonly client: RegistryClient) {}

  /** Variants parsed from the stored payload text; rendering must derive from
   * the same bytes the server sent. */
  get lastVariants(): import("./api.js").VariantPayload[] {
    if (this.lastVariantsText === null) return [];
    return JSON.parse(this.lastVariantsText).variants;
  }

  /** True when any draft differs from what the server stores. */
  get dirty(): boolean {
    if (this.stored === null) return false;
    // context and preference edits are planner-side inputs to variant
    // generation, not spec mutations, so only class/weight edits count
    return (
      JSON.stringify(this.draft.classSources) !== JSON.stringify(this.stored.classSources) ||
      JSON.stringify(this.draft.weights) !== JSON.stringify(this.stored.weights)
    );
  }

  /** Inception needs a clean spec and a generated variant table. */
  get canIncept(): boolean {
    return !this.dirty && this.lastVariantsText !== null;
  }

  async load(specId: string): Promise<void> {
    const { spec } = await this.client.getSpec(specId);
    const classSources: Record<string, string> = {};
    const weights: Record<string, Record<string, number>> = {};
    for (const [role, doc] of Object.entries(spec.roles)) {
      if (doc.classSource !== undefined) {
        classSources[role] = doc.classSource;
      } else if (doc.classRef !== undefined) {
        classSources[role] = (await this.client.getClass(doc.classRef)).source;
      }
      weights[role] = { ...doc.weights };
    }
    this.specId = specId;
    this.stored = { classSources, weights, context: [], preferences: {} };
    this.draft = clone(this.stored);
    this.lastCandidates = null;
    this.lastVariantsText = null;
    this.lastError = null;
  }

  editClassSource(role: string, source: string): void {
    this.draft.classSources[role] = source;
  }

  editWeight(role: string, leafIndex: string, weight: number): void {
    this.draft.weights[role] = { ...this.draft.weights[role], [leafIndex]: weight };
  }

  setContext(triples: ContextTriple[]): void {
    this.draft.context = [...triples];
  }

  setPreferences(overrides: PreferenceOverrides): void {
    this.draft.preferences = { ...overrides };
  }

  /** Re-rank one role's draft class against the registry (weight sliders and
   * requirement editing both land here). */
  async search(role: string): Promise<SearchResponse> {
    const body = {
      classSource: this.draft.classSources[role],
      weights: this.draft.weights[role],
    };
    const response = await this.wrap(() => this.client.search(body));
    this.lastSearch[role] = response;
    return response;
  }

  /** Persist draft class and weight edits, then reload the stored spec so the
   * dirty flag clears only on server acknowledgement. */
  async save(): Promise<void> {
    if (this.stored === null) throw new Error("no spec loaded");
    const { spec } = await this.client.getSpec(this.specId);
    for (const [role, source] of Object.entries(this.draft.classSources)) {
      const roleDoc = spec.roles[role];
      if (roleDoc === undefined) continue;
      if (roleDoc.classRef !== undefined) {
        await this.wrap(() => this.client.putClass(roleDoc.classRef!, source));
      } else {
        roleDoc.classSource = source;
      }
      roleDoc.weights = { ...this.draft.weights[role] };
    }
    await this.wrap(() => this.client.putSpec(spec));
    const context = this.draft.context;
    const preferences = this.draft.preferences;
    await this.load(this.specId);
    this.draft.context = context;
    this.draft.preferences = preferences;
  }

  async refreshCandidates(verify = false): Promise<CandidatesResponse> {
    const response = await this.wrap(() =>
      this.client.candidates(this.specId, { verify }),
    );
    this.lastCandidates = response;
    return response;
  }

  async regenerateVariants(): Promise<void> {
    // keep the exact payload text so rendering cannot drift from the server
    this.lastVariantsText = await this.wrap(() =>
      this.client.variantsRaw(this.specId, {
        context: this.draft.context,
        preferences: this.draft.preferences,
      }),
    );
  }

  async incept(variantIndex: number): Promise<InceptResponse> {
    if (!this.canIncept) {
      throw new Error("incept blocked: unsaved edits or no variant table");
    }
    return this.wrap(() =>
      this.client.incept(this.specId, {
        variantIndex,
        context: this.draft.context,
        preferences: this.draft.preferences,
      }),
    );
  }

  private async wrap<T>(op: () => Promise<T>): Promise<T> {
    try {
      const result = await op();
      this.lastError = null;
      return result;
    } catch (err) {
      if (err instanceof ApiError) this.lastError = err;
      throw err;
    }
  }
}
