/** Small shared DOM helpers for the view modules. */

export function sectionHeader(title: string): HTMLElement {
  const header = document.createElement("div");
  header.className = "section-header";
  const h = document.createElement("h3");
  h.textContent = title;
  header.appendChild(h);
  return header;
}

/** Button that downloads a chart's current SVG markup as a file. */
export function exportButton(exportSvg: () => string, filename: string): HTMLElement {
  const button = document.createElement("button");
  button.className = "export-svg";
  button.textContent = "SVG";
  button.title = `Export ${filename}`;
  button.addEventListener("click", () => {
    const markup = exportSvg();
    const blob = new Blob([markup], { type: "image/svg+xml" });
    const url = URL.createObjectURL(blob);
    const link = document.createElement("a");
    link.href = url;
    link.download = filename;
    link.click();
    URL.revokeObjectURL(url);
  });
  return button;
}
