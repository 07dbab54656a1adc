import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiError, ConsoleApi } from "../src/api.js";

interface RecordedCall {
  method: string;
  path: string;
  auth: string | undefined;
  body: unknown;
}

const calls: RecordedCall[] = [];
let routes: Map<string, () => Response>;

function json(status: number, body?: unknown): Response {
  return new Response(body === undefined ? null : JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function route(method: string, path: string, make: () => Response): void {
  routes.set(`${method} ${path}`, make);
}

beforeEach(() => {
  calls.length = 0;
  routes = new Map();
  vi.stubGlobal(
    "fetch",
    vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
      const path = String(input);
      const method = init?.method ?? "GET";
      const headers = (init?.headers ?? {}) as Record<string, string>;
      calls.push({
        method,
        path,
        auth: headers["Authorization"],
        body: init?.body ? JSON.parse(String(init.body)) : undefined,
      });
      const handler = routes.get(`${method} ${path}`);
      if (!handler) return json(404, { detail: "unrouted in test" });
      return handler();
    }),
  );
});

afterEach(() => {
  vi.unstubAllGlobals();
});

async function loggedIn(): Promise<ConsoleApi> {
  const api = new ConsoleApi();
  route("POST", "/api/login", () => json(200, { token: "tok-123" }));
  await api.login("admin", "pw");
  return api;
}

describe("ConsoleApi", () => {
  it("logs in and keeps the token in memory only", async () => {
    const api = await loggedIn();
    expect(api.authenticated).toBe(true);
    expect(calls[0]).toMatchObject({
      method: "POST",
      path: "/api/login",
      body: { username: "admin", password: "pw" },
    });
    // nothing may leak into durable browser storage
    expect(window.localStorage.length).toBe(0);
    expect(window.sessionStorage.length).toBe(0);
    expect(document.cookie).toBe("");
  });

  it("raises ApiError with the backend detail on 401", async () => {
    const api = new ConsoleApi();
    route("POST", "/api/login", () => json(401, { detail: "wrong username or password" }));
    await expect(api.login("admin", "nope")).rejects.toMatchObject({
      status: 401,
      message: "wrong username or password",
    });
    expect(api.authenticated).toBe(false);
  });

  it("attaches the bearer token to every later call", async () => {
    const api = await loggedIn();
    route("GET", "/api/photos", () => json(200, []));
    await api.listPhotos();
    expect(calls[1].auth).toBe("Bearer tok-123");
  });

  it("maps each method onto exactly its route", async () => {
    const api = await loggedIn();
    route("GET", "/api/photos", () => json(200, []));
    route("DELETE", "/api/photos/7", () => json(200, { ok: true }));
    route("POST", "/api/password", () => json(200, { ok: true }));
    route("GET", "/api/contacts", () => json(200, []));
    route("POST", "/api/contacts", () => json(200, { id: 3, contact_no: "0137179296" }));
    route("DELETE", "/api/contacts/3", () => json(200, { ok: true }));
    route("POST", "/api/logout", () => json(200, { ok: true }));

    await api.listPhotos();
    await api.deletePhoto(7);
    await api.changePassword("a", "b", "b");
    await api.listContacts();
    await api.addContact("0137179296");
    await api.deleteContact(3);
    await api.logout();

    expect(calls.slice(1).map((c) => `${c.method} ${c.path}`)).toEqual([
      "GET /api/photos",
      "DELETE /api/photos/7",
      "POST /api/password",
      "GET /api/contacts",
      "POST /api/contacts",
      "DELETE /api/contacts/3",
      "POST /api/logout",
    ]);
    expect(calls[3].body).toEqual({ old: "a", new: "b", confirm: "b" });
  });

  it("turns 204 latest into null", async () => {
    const api = await loggedIn();
    route("GET", "/api/photos/latest", () => new Response(null, { status: 204 }));
    expect(await api.latestPhoto()).toBeNull();
  });

  it("parses the latest photo row", async () => {
    const api = await loggedIn();
    const row = { id: 1, image: "2010-04-12_21-57-21.jpg", time: "21:57:21", date: "2010-04-12" };
    route("GET", "/api/photos/latest", () => json(200, row));
    expect(await api.latestPhoto()).toEqual(row);
  });

  it("clears the token on logout even when the request fails", async () => {
    const api = await loggedIn();
    route("POST", "/api/logout", () => json(500, { detail: "boom" }));
    await expect(api.logout()).rejects.toBeInstanceOf(ApiError);
    expect(api.authenticated).toBe(false);
  });

  it("fetches image bytes through the authorized route", async () => {
    const api = await loggedIn();
    vi.stubGlobal("URL", Object.assign(URL, { createObjectURL: () => "blob:fake-url" }));
    routes.set("GET /images/shot.jpg", () => new Response(new Blob([new Uint8Array([1])])));
    expect(await api.imageObjectUrl("shot.jpg")).toBe("blob:fake-url");
    expect(calls[1].auth).toBe("Bearer tok-123");
  });
});
