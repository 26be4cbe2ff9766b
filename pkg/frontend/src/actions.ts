/** Every event name this client can emit.
 *
 * The server rejects unknown actions, so this list is verified against
 * the shared vocabulary file by a contract test; add names here only
 * when they exist there.
 */
export const UI_ACTIONS = [
  "search",
  "view_record",
  "view_record_links",
  "page",
  "change_category",
  "goto_fulltext",
  "open_linked_resources_section",
  "click_on_linked_resource",
  "export_popup",
  "export_bibtex",
  "export_citavi",
  "export_endnote",
  "export_apa",
  "dataset_popup",
  "questionnaire_popup",
  "codebook_popup",
  "otherdocs_popup",
] as const;

export type UiAction = (typeof UI_ACTIONS)[number];

const MATERIAL_ACTIONS: Record<string, UiAction> = {
  dataset: "dataset_popup",
  questionnaire: "questionnaire_popup",
  codebook: "codebook_popup",
};

/** Action logged when a supplementary-material link is followed. */
export function materialAction(kind: string): UiAction {
  return MATERIAL_ACTIONS[kind] ?? "otherdocs_popup";
}

const EXPORT_ACTIONS: Record<string, UiAction> = {
  bibtex: "export_bibtex",
  ris: "export_citavi",
  endnote: "export_endnote",
  apa_text: "export_apa",
};

/** Action logged when a citation download in the given format starts. */
export function exportAction(format: string): UiAction {
  return EXPORT_ACTIONS[format] ?? "export_popup";
}
