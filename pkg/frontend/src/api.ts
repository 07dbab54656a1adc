// Typed client for the console API. Every method maps 1:1 onto one backend
// route; the bearer token lives in memory only and is never written to any
// durable browser storage.

export interface PhotoRow {
  id: number;
  image: string;
  time: string;
  date: string;
}

export interface ContactRow {
  id: number;
  contact_no: string;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") return body.detail;
  } catch {
    // non-JSON error body: fall through to the status line
  }
  return `request failed with ${response.status}`;
}

export class ConsoleApi {
  private token: string | null = null;

  constructor(private baseUrl: string = "") {}

  get authenticated(): boolean {
    return this.token !== null;
  }

  clearToken(): void {
    this.token = null;
  }

  private async request(method: string, path: string, body?: unknown): Promise<Response> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const response = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return response;
  }

  async login(username: string, password: string): Promise<void> {
    const response = await this.request("POST", "/api/login", { username, password });
    const data = (await response.json()) as { token: string };
    this.token = data.token;
  }

  async logout(): Promise<void> {
    try {
      await this.request("POST", "/api/logout");
    } finally {
      this.token = null;
    }
  }

  async latestPhoto(): Promise<PhotoRow | null> {
    const response = await this.request("GET", "/api/photos/latest");
    if (response.status === 204) return null;
    return (await response.json()) as PhotoRow;
  }

  async listPhotos(): Promise<PhotoRow[]> {
    const response = await this.request("GET", "/api/photos");
    return (await response.json()) as PhotoRow[];
  }

  async deletePhoto(id: number): Promise<void> {
    await this.request("DELETE", `/api/photos/${id}`);
  }

  // Image bytes sit behind the same bearer auth as everything else, so the
  // <img> tag gets an object URL instead of a direct path.
  async imageObjectUrl(name: string): Promise<string> {
    const response = await this.request("GET", `/images/${encodeURIComponent(name)}`);
    return URL.createObjectURL(await response.blob());
  }

  async changePassword(oldPassword: string, newPassword: string, confirm: string): Promise<void> {
    await this.request("POST", "/api/password", {
      old: oldPassword,
      new: newPassword,
      confirm,
    });
  }

  async listContacts(): Promise<ContactRow[]> {
    const response = await this.request("GET", "/api/contacts");
    return (await response.json()) as ContactRow[];
  }

  async addContact(contactNo: string): Promise<ContactRow> {
    const response = await this.request("POST", "/api/contacts", { contact_no: contactNo });
    return (await response.json()) as ContactRow;
  }

  async deleteContact(id: number): Promise<void> {
    await this.request("DELETE", `/api/contacts/${id}`);
  }
}
