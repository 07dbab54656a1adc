// The console itself: four screens (login, home, view, setting) over the
// ConsoleApi client. No business logic here beyond input validation and
// rendering; every button press is one API call.

import { ApiError, ConsoleApi, ContactRow, PhotoRow } from "./api.js";

export type Screen = "login" | "home" | "view" | "setting";

export interface ViewState {
  screen: Screen;
  photos: PhotoRow[];
  contacts: ContactRow[];
}

const POLL_INTERVAL_MS = 5000;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

export class App {
  readonly state: ViewState = { screen: "login", photos: [], contacts: [] };
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private shownPhotoId: number | null = null;

  constructor(
    private api: ConsoleApi,
    private root: HTMLElement,
    private pollIntervalMs: number = POLL_INTERVAL_MS,
  ) {}

  start(): void {
    this.show("login");
  }

  show(screen: Screen): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
    this.state.screen = screen;
    this.root.replaceChildren();
    if (screen !== "login") this.root.appendChild(this.navBar());
    const banner = el("div", { class: "banner hidden", id: "banner" });
    this.root.appendChild(banner);
    switch (screen) {
      case "login":
        this.renderLogin();
        break;
      case "home":
        this.renderHome();
        break;
      case "view":
        void this.renderView();
        break;
      case "setting":
        void this.renderSetting();
        break;
    }
  }

  banner(message: string): void {
    const node = this.root.querySelector("#banner");
    if (node) {
      node.textContent = message;
      node.classList.remove("hidden");
    }
  }

  // API failures surface as a banner; a dead session drops back to login.
  private fail(error: unknown): void {
    if (error instanceof ApiError && error.status === 401 && this.state.screen !== "login") {
      this.api.clearToken();
      this.show("login");
      this.banner("Session expired; please log in again.");
      return;
    }
    this.banner(error instanceof Error ? error.message : String(error));
  }

  private navBar(): HTMLElement {
    const nav = el("nav", { class: "topnav" });
    const links: Array<[string, Screen]> = [
      ["Home", "home"],
      ["View", "view"],
      ["Setting", "setting"],
    ];
    for (const [label, screen] of links) {
      const link = el("a", { href: "#", "data-screen": screen }, label);
      if (screen === this.state.screen) link.classList.add("active");
      link.addEventListener("click", (event) => {
        event.preventDefault();
        this.show(screen);
      });
      nav.appendChild(link);
    }
    const logout = el("a", { href: "#", id: "logout" }, "Logout");
    logout.addEventListener("click", (event) => {
      event.preventDefault();
      void this.api.logout().catch(() => undefined);
      this.show("login");
    });
    nav.appendChild(logout);
    return nav;
  }

  // -- login -----------------------------------------------------------------

  private renderLogin(): void {
    const card = el("div", { class: "card login-card" });
    card.appendChild(el("h1", {}, "Motion Detector"));
    const form = el("form", { id: "login-form" });
    const username = el("input", { name: "username", placeholder: "Username", autocomplete: "username" });
    const password = el("input", {
      name: "password",
      type: "password",
      placeholder: "Password",
      autocomplete: "current-password",
    });
    const submit = el("button", { type: "submit" }, "Log in");
    form.append(username, password, submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      this.api
        .login(username.value, password.value)
        .then(() => this.show("home"))
        .catch((error: unknown) => {
          if (error instanceof ApiError && error.status === 401) {
            this.banner("Wrong username or password.");
          } else {
            this.fail(error);
          }
        });
    });
    card.appendChild(form);
    this.root.appendChild(card);
  }

  // -- home: latest capture, refreshed on a poll ------------------------------

  private renderHome(): void {
    const card = el("div", { class: "card", id: "latest-card" });
    card.appendChild(el("h2", {}, "Latest capture"));
    card.appendChild(el("div", { id: "latest-body" }, "Loading..."));
    this.root.appendChild(card);
    void this.refreshLatest();
    this.pollTimer = setInterval(() => void this.refreshLatest(), this.pollIntervalMs);
  }

  private async refreshLatest(): Promise<void> {
    try {
      const latest = await this.api.latestPhoto();
      const body = this.root.querySelector("#latest-body");
      if (!body) return;
      if (latest === null) {
        this.shownPhotoId = null;
        body.replaceChildren(el("p", { class: "muted" }, "No captures yet."));
        return;
      }
      if (latest.id === this.shownPhotoId) return;
      this.shownPhotoId = latest.id;
      const image = el("img", { id: "latest-image", alt: latest.image });
      void this.api
        .imageObjectUrl(latest.image)
        .then((url) => image.setAttribute("src", url))
        .catch(() => undefined);
      const caption = el(
        "p",
        { id: "latest-caption" },
        `Time ${latest.time} — Date ${latest.date}`,
      );
      body.replaceChildren(image, caption);
    } catch (error) {
      this.fail(error);
    }
  }

  // -- view: the archive table --------------------------------------------------

  private async renderView(): Promise<void> {
    const card = el("div", { class: "card" });
    card.appendChild(el("h2", {}, "Captured images"));
    const table = el("table", { id: "photo-table" });
    table.appendChild(this.headerRow(["No.", "Image", "Time", "Date", "Option"]));
    card.appendChild(table);
    this.root.appendChild(card);
    try {
      this.state.photos = await this.api.listPhotos();
    } catch (error) {
      this.fail(error);
      return;
    }
    this.state.photos.forEach((photo, index) => {
      const row = el("tr", { class: "photo-row" });
      row.appendChild(el("td", {}, String(index + 1)));
      row.appendChild(el("td", {}, photo.image));
      row.appendChild(el("td", {}, photo.time));
      row.appendChild(el("td", {}, photo.date));
      const actions = el("td");
      const remove = el("button", { class: "delete-photo", "data-id": String(photo.id) }, "Delete");
      remove.addEventListener("click", () => {
        if (!window.confirm(`Delete ${photo.image}?`)) return;
        this.api
          .deletePhoto(photo.id)
          .then(() => this.show("view"))
          .catch((error: unknown) => this.fail(error));
      });
      actions.appendChild(remove);
      row.appendChild(actions);
      table.appendChild(row);
    });
  }

  private headerRow(labels: string[]): HTMLElement {
    const row = el("tr");
    for (const label of labels) row.appendChild(el("th", {}, label));
    return row;
  }

  // -- setting: password and the alert contact list -------------------------------

  private async renderSetting(): Promise<void> {
    const password = el("div", { class: "card" });
    password.appendChild(el("h2", {}, "Change password"));
    const form = el("form", { id: "password-form" });
    const oldField = el("input", { type: "password", name: "old", placeholder: "Old Password" });
    const newField = el("input", { type: "password", name: "new", placeholder: "New Password" });
    const confirmField = el("input", {
      type: "password",
      name: "confirm",
      placeholder: "Confirm Password",
    });
    const note = el("p", { class: "field-error hidden", id: "password-error" });
    const submit = el("button", { type: "submit" }, "Submit");
    form.append(oldField, newField, confirmField, note, submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      note.classList.add("hidden");
      if (newField.value !== confirmField.value) {
        // caught client-side: no request leaves the page
        note.textContent = "New password and confirmation do not match.";
        note.classList.remove("hidden");
        return;
      }
      this.api
        .changePassword(oldField.value, newField.value, confirmField.value)
        .then(() => {
          this.banner("Password changed.");
          form.reset();
        })
        .catch((error: unknown) => {
          if (error instanceof ApiError && error.status === 403) {
            note.textContent = "Old password is wrong.";
            note.classList.remove("hidden");
          } else {
            this.fail(error);
          }
        });
    });
    password.appendChild(form);
    this.root.appendChild(password);

    const contacts = el("div", { class: "card" });
    contacts.appendChild(el("h2", {}, "Add Contact"));
    const contactForm = el("form", { id: "contact-form" });
    const number = el("input", { name: "contact_no", placeholder: "Contact No." });
    const add = el("button", { type: "submit" }, "Add");
    contactForm.append(number, add);
    contactForm.addEventListener("submit", (event) => {
      event.preventDefault();
      this.api
        .addContact(number.value.trim())
        .then(() => this.show("setting"))
        .catch((error: unknown) => {
          if (error instanceof ApiError && error.status === 422) {
            this.banner("That does not look like a phone number.");
          } else {
            this.fail(error);
          }
        });
    });
    contacts.appendChild(contactForm);

    contacts.appendChild(el("h2", {}, "Contact List"));
    const table = el("table", { id: "contact-table" });
    table.appendChild(this.headerRow(["No.", "Contact No.", "Option"]));
    contacts.appendChild(table);
    this.root.appendChild(contacts);
    try {
      this.state.contacts = await this.api.listContacts();
    } catch (error) {
      this.fail(error);
      return;
    }
    this.state.contacts.forEach((contact, index) => {
      const row = el("tr", { class: "contact-row" });
      row.appendChild(el("td", {}, String(index + 1)));
      row.appendChild(el("td", {}, contact.contact_no));
      const actions = el("td");
      const remove = el(
        "button",
        { class: "delete-contact", "data-id": String(contact.id) },
        "Delete",
      );
      remove.addEventListener("click", () => {
        this.api
          .deleteContact(contact.id)
          .then(() => this.show("setting"))
          .catch((error: unknown) => this.fail(error));
      });
      actions.appendChild(remove);
      row.appendChild(actions);
      table.appendChild(row);
    });
  }
}
