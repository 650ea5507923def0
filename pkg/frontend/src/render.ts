/** Pure rendering helpers shared by the DOM layer and the tests.
 *
 * Scores shown in the variant table come out of the server's response bytes
 * via rawFieldLexemes, never through Number formatting, so a payload value
 * like 1.0 is displayed as "1.0" and not "1".
 */

import { RequirementDetail, RoleCandidates, VariantPayload } from "./api.js";

/** The exact source text of every value of a top-level object field, in
 * document order. Works on any JSON text regardless of whitespace style. */
export function rawFieldLexemes(raw: string, field: string): string[] {
  const needle = JSON.stringify(field);
  const out: string[] = [];
  let from = 0;
  for (;;) {
    const at = raw.indexOf(needle, from);
    if (at === -1) return out;
    let i = at + needle.length;
    while (i < raw.length && /\s/.test(raw[i])) i++;
    if (raw[i] !== ":") {
      from = at + needle.length;
      continue;
    }
    i++;
    while (i < raw.length && /\s/.test(raw[i])) i++;
    const start = i;
    let depth = 0;
    let inString = false;
    for (; i < raw.length; i++) {
      const ch = raw[i];
      if (inString) {
        if (ch === "\\") i++;
        else if (ch === '"') inString = false;
        continue;
      }
      if (ch === '"') inString = true;
      else if (ch === "{" || ch === "[") depth++;
      else if (ch === "}" || ch === "]") {
        if (depth === 0) break;
        depth--;
      } else if (ch === "," && depth === 0) break;
    }
    out.push(raw.slice(start, i).trimEnd());
    from = i;
  }
}

export interface VariantRow {
  index: number;
  assignment: string;
  competenceScore: string;
  socialScore: string;
  totalCost: string;
  totalDuration: string;
  socialViolation: boolean;
}

/** Table rows for the variant panel; score cells carry raw payload lexemes. */
export function variantRows(raw: string): VariantRow[] {
  const variants: VariantPayload[] = JSON.parse(raw).variants;
  const competence = rawFieldLexemes(raw, "competenceScore");
  const social = rawFieldLexemes(raw, "socialScore");
  const cost = rawFieldLexemes(raw, "totalCost");
  const duration = rawFieldLexemes(raw, "totalDuration");
  return variants.map((v, i) => ({
    index: i,
    assignment: Object.entries(v.assignment)
      .map(([role, a]) => `${role}=${a.orgId}`)
      .join(", "),
    competenceScore: competence[i],
    socialScore: social[i],
    totalCost: cost[i],
    totalDuration: duration[i],
    socialViolation: !v.socialSatisfied,
  }));
}

export function detailBadge(detail: RequirementDetail["detail"]): string {
  return { "satisfied": "ok", "value-mismatch": "mismatch", "property-missing": "missing", "type-error": "type" }[
    detail
  ];
}

export function candidateSummary(role: string, rc: RoleCandidates): string {
  const names = Object.keys(rc.candidates);
  const parts = [`${role}: ${names.length} candidate(s)`];
  if (rc.flagged.length > 0) parts.push(`flagged: ${rc.flagged.join(", ")}`);
  if (rc.relaxationSuggested) parts.push("relax requirements");
  return parts.join(" | ");
}
