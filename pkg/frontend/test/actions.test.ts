import { readFileSync } from "node:fs";
import { resolve } from "node:path";
import { describe, expect, it } from "vitest";
import { UI_ACTIONS, exportAction, materialAction } from "../src/actions.js";

// The server validates events against this same file, so membership
// here means POST /api/log accepts the action. Tests run from the
// frontend directory; the vocabulary lives in the service package.
const vocabularyPath = resolve(
  process.cwd(),
  "../src/datanexus/resources/action_vocabulary.json",
);
const vocabulary = JSON.parse(readFileSync(vocabularyPath, "utf-8")) as {
  core: string[];
  signals: Record<string, string[]>;
};
const serverActions = new Set<string>([
  ...vocabulary.core,
  ...Object.values(vocabulary.signals).flat(),
]);

describe("shared action vocabulary", () => {
  it("accepts every action the UI can emit", () => {
    for (const action of UI_ACTIONS) {
      expect(serverActions.has(action), `unknown action: ${action}`).toBe(true);
    }
  });

  it("covers the link-box unfold action", () => {
    expect(UI_ACTIONS).toContain("open_linked_resources_section");
    expect(vocabulary.signals.view_linked_resources).toContain(
      "open_linked_resources_section",
    );
  });

  it("maps material kinds onto vocabulary actions", () => {
    expect(materialAction("questionnaire")).toBe("questionnaire_popup");
    expect(materialAction("codebook")).toBe("codebook_popup");
    expect(materialAction("dataset")).toBe("dataset_popup");
    expect(materialAction("errata")).toBe("otherdocs_popup");
    for (const kind of ["questionnaire", "codebook", "dataset", "method report"]) {
      expect(serverActions.has(materialAction(kind))).toBe(true);
    }
  });

  it("maps every server citation format onto a vocabulary action", () => {
    for (const format of ["bibtex", "ris", "endnote", "apa_text"]) {
      const action = exportAction(format);
      expect(serverActions.has(action)).toBe(true);
      expect(action.startsWith("export_")).toBe(true);
    }
  });
});
