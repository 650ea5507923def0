/** Typed fetch client for the registry HTTP API.
 *
 * Every method maps to exactly one documented endpoint; no scoring or
 * filtering happens client-side. Validation failures (400) carry the
 * server's violation list so the UI can render them inline.
 */

export interface RequirementDetail {
  path: string;
  predicate: string;
  satisfied: boolean;
  detail: "satisfied" | "value-mismatch" | "property-missing" | "type-error";
}

export interface SearchResult {
  org: string;
  score: number;
  isInstance: boolean;
  requirements: RequirementDetail[];
}

export interface SearchResponse {
  results: SearchResult[];
  relaxationSuggested: boolean;
}

export interface RoleCandidates {
  candidates: Record<string, number>;
  relaxationSuggested: boolean;
  rejected: Record<string, number>;
  services: Record<string, string | null>;
  flagged: string[];
  excluded: string[];
}

export interface CandidatesResponse {
  roles: Record<string, RoleCandidates>;
}

export interface VariantPayload {
  assignment: Record<string, { orgId: string; svcId: string | null }>;
  perRoleScore: Record<string, number>;
  competenceScore: number;
  socialScore: number;
  socialSatisfied: boolean;
  totalCost: number;
  totalDuration: number;
}

export interface VariantsResponse {
  variants: VariantPayload[];
}

export interface InceptResponse {
  voId: string;
  variant: VariantPayload;
}

export interface SpecDocument {
  id: string;
  processModel: { activity: string; role: string }[];
  roles: Record<
    string,
    { classRef?: string; classSource?: string; weights: Record<string, number>; serviceRequirements: string[] }
  >;
  schema: unknown;
  preferences: {
    sortKeys: { key: string; order: "asc" | "desc" }[];
    minAcceptableScore: number;
    allowMultiRoleOrg: boolean;
  };
}

export interface VerifyResponse {
  orgId: string;
  reliabilityScore: number;
  hasDiscrepancy: boolean;
  checks: {
    claim: string;
    sourceOfTruth: string;
    claimed: unknown;
    observed: unknown;
    flag: "consistent" | "discrepancy" | "unverifiable";
  }[];
}

export interface EventPayload {
  topic: string;
  sequence: number;
  payload: Record<string, unknown>;
}

export type ContextTriple = [string, string, string];

export interface PreferenceOverrides {
  sortKeys?: { key: string; order: "asc" | "desc" }[];
  minAcceptableScore?: number;
  allowMultiRoleOrg?: boolean;
}

/** Error with the server's status code and, for 400s, its violation list. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly violations: string[],
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function asApiError(resp: Response): Promise<ApiError> {
  let violations: string[] = [];
  let message = `${resp.status} ${resp.statusText}`;
  try {
    const body = await resp.json();
    if (Array.isArray(body.violations)) {
      violations = body.violations.map(String);
      message = violations.join("; ");
    } else if (typeof body.error === "string") {
      message = body.error;
    } else if (typeof body.detail === "string") {
      message = body.detail;
    } else if (body.detail && Array.isArray(body.detail.violations)) {
      violations = body.detail.violations.map(String);
      message = violations.join("; ");
    }
  } catch {
    // non-JSON body: keep the status line
  }
  return new ApiError(resp.status, violations, message);
}

export class RegistryClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!resp.ok) throw await asApiError(resp);
    return (await resp.json()) as T;
  }

  getSpec(specId: string): Promise<{ spec: SpecDocument; normalized: SpecDocument }> {
    return this.request(`/specs/${encodeURIComponent(specId)}`);
  }

  putSpec(spec: SpecDocument): Promise<{ specId: string }> {
    return this.request(`/specs/${encodeURIComponent(spec.id)}`, {
      method: "PUT",
      body: JSON.stringify(spec),
    });
  }

  getClass(name: string): Promise<{ name: string; source: string }> {
    return this.request(`/classes/${encodeURIComponent(name)}`);
  }

  putClass(name: string, source: string): Promise<{ name: string }> {
    return this.request(`/classes/${encodeURIComponent(name)}`, {
      method: "PUT",
      body: JSON.stringify({ source }),
    });
  }

  search(body: {
    class?: string;
    classSource?: string;
    weights?: Record<string, number>;
  }): Promise<SearchResponse> {
    return this.request("/search", { method: "POST", body: JSON.stringify(body) });
  }

  candidates(
    specId: string,
    body: { verify?: boolean; excludeDiscrepant?: boolean } = {},
  ): Promise<CandidatesResponse> {
    return this.request(`/specs/${encodeURIComponent(specId)}/candidates`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  variants(
    specId: string,
    body: { context?: ContextTriple[]; preferences?: PreferenceOverrides; verify?: boolean } = {},
  ): Promise<VariantsResponse> {
    return this.request(`/specs/${encodeURIComponent(specId)}/variants`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  /** Same call as variants(), but returns the exact response text. The UI
   * renders score lexemes straight out of these bytes, so what the planner
   * sees is what the server sent, digit for digit. */
  async variantsRaw(
    specId: string,
    body: { context?: ContextTriple[]; preferences?: PreferenceOverrides; verify?: boolean } = {},
  ): Promise<string> {
    const resp = await this.fetchImpl(
      this.baseUrl + `/specs/${encodeURIComponent(specId)}/variants`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      },
    );
    if (!resp.ok) throw await asApiError(resp);
    return resp.text();
  }

  incept(
    specId: string,
    body: { variantIndex: number; context?: ContextTriple[]; preferences?: PreferenceOverrides },
  ): Promise<InceptResponse> {
    return this.request(`/specs/${encodeURIComponent(specId)}/incept`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  verify(orgId: string): Promise<VerifyResponse> {
    return this.request(`/verify/${encodeURIComponent(orgId)}`, { method: "POST" });
  }

  events(topic: string, since: number, timeoutSeconds = 25): Promise<{ events: EventPayload[] }> {
    const params = new URLSearchParams({
      topic,
      since: String(since),
      timeout: String(timeoutSeconds),
    });
    return this.request(`/events?${params}`);
  }
}
