/** Non-blocking error banners fed by API failures. */

import type { ApiFailure } from "./api";

export class BannerArea {
  readonly el: HTMLElement;

  constructor(container: HTMLElement) {
    this.el = document.createElement("div");
    this.el.className = "banners";
    container.appendChild(this.el);
  }

  show(failure: ApiFailure): void {
    const banner = document.createElement("div");
    banner.className = "banner";
    banner.setAttribute("data-code", failure.error.code);
    const text = document.createElement("span");
    text.textContent = `${failure.error.code}: ${failure.error.message}`;
    const close = document.createElement("button");
    close.textContent = "dismiss";
    close.addEventListener("click", () => banner.remove());
    banner.append(text, close);
    this.el.appendChild(banner);
    setTimeout(() => banner.remove(), 15000);
  }
}
