import { describe, expect, it } from "vitest";

import { candidateSummary, detailBadge, rawFieldLexemes, variantRows } from "../src/render.js";

describe("rawFieldLexemes", () => {
  it("returns the exact source text of each field value", () => {
    const raw = '{"a": 1.0, "b": {"a": 2.50}, "list": [{"a": "x,y"}]}';
    expect(rawFieldLexemes(raw, "a")).toEqual(["1.0", "2.50", '"x,y"']);
  });

  it("keeps trailing-zero formatting that Number would lose", () => {
    const raw = '{"totalCost": 100.0}';
    expect(rawFieldLexemes(raw, "totalCost")).toEqual(["100.0"]);
    expect(String(JSON.parse(raw).totalCost)).toBe("100");
  });

  it("handles compact separators and nested containers", () => {
    const raw = '{"score":0.3,"rows":[{"score":[1,2]},{"score":{"x":1}}]}';
    expect(rawFieldLexemes(raw, "score")).toEqual(["0.3", "[1,2]", '{"x":1}']);
  });

  it("ignores strings that merely contain the field name", () => {
    const raw = '{"note": "score", "score": 7}';
    expect(rawFieldLexemes(raw, "score")).toEqual(["7"]);
  });
});

describe("variantRows", () => {
  const raw = JSON.stringify({
    variants: [
      {
        assignment: { lead: { orgId: "a", svcId: "s" }, support: { orgId: "b", svcId: null } },
        perRoleScore: { lead: 1.0 },
        competenceScore: 1.0,
        socialScore: 1.0,
        socialSatisfied: true,
        totalCost: 100.0,
        totalDuration: 10.0,
      },
      {
        assignment: { lead: { orgId: "a", svcId: "s" }, support: { orgId: "a", svcId: "s" } },
        perRoleScore: { lead: 1.0 },
        competenceScore: 1.0,
        socialScore: 0.0,
        socialSatisfied: false,
        totalCost: 180.0,
        totalDuration: 16.0,
      },
    ],
  });

  it("joins assignments and flags social violations", () => {
    const rows = variantRows(raw);
    expect(rows[0].assignment).toBe("lead=a, support=b");
    expect(rows[0].socialViolation).toBe(false);
    expect(rows[1].socialViolation).toBe(true);
  });

  it("carries score lexemes from the payload bytes", () => {
    // python-style float formatting survives only via lexemes
    const pythonRaw = raw.replace('"totalCost":100,', '"totalCost":100.0,');
    const rows = variantRows(pythonRaw);
    expect(rows[0].totalCost).toBe("100.0");
  });
});

describe("presentation helpers", () => {
  it("maps requirement details to badges", () => {
    expect(detailBadge("satisfied")).toBe("ok");
    expect(detailBadge("property-missing")).toBe("missing");
  });

  it("summarizes a role's candidate set", () => {
    const summary = candidateSummary("lead", {
      candidates: { a: 1 },
      relaxationSuggested: false,
      rejected: {},
      services: { a: null },
      flagged: ["a"],
      excluded: [],
    });
    expect(summary).toBe("lead: 1 candidate(s) | flagged: a");
  });

  it("notes relaxation when a role has no candidates", () => {
    const summary = candidateSummary("lead", {
      candidates: {},
      relaxationSuggested: true,
      rejected: { b: 0.2 },
      services: {},
      flagged: [],
      excluded: [],
    });
    expect(summary).toContain("relax requirements");
  });
});
