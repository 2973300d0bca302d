import type {
	ApiErrorBody,
	CreateResponse,
	FramesResponse,
	RetrainResponse,
	Snapshot,
} from "./types.js";

export class ApiError extends Error {
	constructor(
		public status: number,
		public code: string,
		message: string,
	) {
		super(message);
	}
}

/**
 * Thin typed client for the session service. Mutating calls are serialized
 * through a queue so the client never races itself against the server's
 * one-writer-per-session rule.
 */
export class SessionClient {
	private queue: Promise<unknown> = Promise.resolve();

	constructor(
		private baseUrl: string,
		private fetchImpl: typeof fetch = fetch,
	) {}

	private async request<T>(path: string, init?: RequestInit): Promise<T> {
		const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
		const body = await response.json();
		if (!response.ok) {
			const err = body as ApiErrorBody;
			throw new ApiError(response.status, err.code ?? "error", err.message ?? "request failed");
		}
		return body as T;
	}

	private post<T>(path: string, payload?: unknown): Promise<T> {
		const run = () =>
			this.request<T>(path, {
				method: "POST",
				headers: { "Content-Type": "application/json" },
				body: JSON.stringify(payload ?? {}),
			});
		const next = this.queue.then(run, run);
		this.queue = next.catch(() => undefined);
		return next;
	}

	health(): Promise<{ status: string }> {
		return this.request("/health");
	}

	createSession(payload: Record<string, unknown> = {}): Promise<CreateResponse> {
		return this.post("/session", payload);
	}

	getState(id: string): Promise<Snapshot> {
		return this.request(`/session/${id}`);
	}

	setAlpha(id: string, alpha: number): Promise<{ status: string; alpha: number }> {
		return this.post(`/session/${id}/alpha`, { alpha });
	}

	labelInstances(id: string, indices: number[], cls: number): Promise<{ label_counts: number[] }> {
		return this.post(`/session/${id}/labels`, { indices, class: cls });
	}

	retrain(id: string): Promise<RetrainResponse> {
		return this.post(`/session/${id}/retrain`);
	}

	frames(id: string, since: number): Promise<FramesResponse> {
		return this.request(`/session/${id}/frames?since=${since}`);
	}
}
