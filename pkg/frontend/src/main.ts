/**
 * Browser wiring: read the start form, run a session, re-render on every
 * state change, and route clicks/keys into the controller.
 */

import { RatingApi, type SlotId } from "./api.js";
import { SessionController } from "./controller.js";
import { render, renderReport } from "./view.js";

function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? "http://127.0.0.1:8000";
}

function mount(): void {
  const root = document.getElementById("app");
  const form = document.getElementById("start-form") as HTMLFormElement | null;
  if (!root || !form) return;

  const api = new RatingApi(apiBase());
  let controller: SessionController | null = null;

  const redraw = () => {
    if (!controller) return;
    root.innerHTML = render(controller.state);
  };

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (!controller) return;
    if (target.id === "submit") void controller.submit().then(redraw);
    if (target.id === "retry") void controller.retry().then(redraw);
    const slot = target.dataset.slot as SlotId | undefined;
    if (slot && target.dataset.score !== undefined) {
      controller.score(slot, Number(target.dataset.score));
    } else if (slot) {
      controller.select(slot);
    }
  });

  document.addEventListener("keydown", (event) => {
    if (!controller) return;
    if (event.target instanceof HTMLInputElement) return;
    if (event.key === "Tab") event.preventDefault();
    void controller.key(event.key);
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const evaluator = String(data.get("evaluator") ?? "").trim();
    const language = String(data.get("language") ?? "").trim();
    if (!evaluator || !language) return;
    controller = new SessionController(api, evaluator, language);
    controller.onChange(redraw);
    form.hidden = true;
    void controller.start().catch(redraw);
  });

  const reportButton = document.getElementById("show-report");
  reportButton?.addEventListener("click", () => {
    const data = new FormData(form);
    const language = String(data.get("language") ?? "").trim() || undefined;
    void api.report(language).then((report) => {
      root.innerHTML = renderReport(report);
      form.hidden = false;
    });
  });
}

mount();
