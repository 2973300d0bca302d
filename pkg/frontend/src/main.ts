import { ApiError, SessionClient } from "./api.js";
import { iterationsMonotone, mergeFrames, playbackAt } from "./animate.js";
import { selectIndices } from "./lasso.js";
import { buildScene, classColor, type Scene } from "./scene.js";
import type { Frame, Point, Snapshot } from "./types.js";

const POLL_MS = 400;
const MS_PER_FRAME = 120;

function el<T extends HTMLElement>(id: string): T {
	const node = document.getElementById(id);
	if (!node) throw new Error(`missing element #${id}`);
	return node as T;
}

class App {
	private client = new SessionClient("");
	private sessionId = "";
	private snapshot: Snapshot | null = null;
	private scene: Scene | null = null;
	private frames: Frame[] = [];
	private animationStart = 0;
	private lastFrameIndex = -1;
	private lasso: Point[] = [];
	private lassoActive = false;
	private selection: number[] = [];
	private canvas = el<HTMLCanvasElement>("scatter");
	private ctx = this.canvas.getContext("2d")!;
	private slider = el<HTMLInputElement>("alpha-slider");
	private alphaLabel = el<HTMLSpanElement>("alpha-value");
	private accuracyLabel = el<HTMLSpanElement>("accuracy");
	private statusLabel = el<HTMLSpanElement>("status");
	private classPicker = el<HTMLDivElement>("class-picker");
	private retrainButton = el<HTMLButtonElement>("retrain");

	async start(): Promise<void> {
		const created = await this.client.createSession({});
		this.sessionId = created.id;
		this.buildClassButtons(created.class_names);
		this.wireControls();
		await this.refresh();
		window.setInterval(() => void this.poll(), POLL_MS);
		const redraw = () => {
			this.render();
			requestAnimationFrame(redraw);
		};
		requestAnimationFrame(redraw);
	}

	private buildClassButtons(names: string[]): void {
		names.forEach((name, cls) => {
			const button = document.createElement("button");
			button.textContent = name;
			button.style.borderLeft = `10px solid ${classColor(cls)}`;
			button.addEventListener("click", () => void this.assignSelection(cls));
			this.classPicker.appendChild(button);
		});
	}

	private wireControls(): void {
		this.slider.addEventListener("change", () => {
			const alpha = Number(this.slider.value) / 100;
			void this.requestAlpha(alpha);
		});
		this.retrainButton.addEventListener("click", () => void this.requestRetrain());
		this.canvas.addEventListener("pointerdown", (e) => {
			this.lassoActive = true;
			this.lasso = [this.canvasPoint(e)];
		});
		this.canvas.addEventListener("pointermove", (e) => {
			if (this.lassoActive) this.lasso.push(this.canvasPoint(e));
		});
		this.canvas.addEventListener("pointerup", () => {
			this.lassoActive = false;
			this.finishLasso();
		});
	}

	private canvasPoint(e: PointerEvent): Point {
		const rect = this.canvas.getBoundingClientRect();
		return [e.clientX - rect.left, e.clientY - rect.top];
	}

	private finishLasso(): void {
		if (!this.scene || this.lasso.length < 3) {
			this.lasso = [];
			return;
		}
		const positions: Point[] = this.scene.points.map((p) => [p.x, p.y]);
		this.selection = selectIndices(positions, this.lasso);
		this.lasso = [];
		this.statusLabel.textContent = this.selection.length
			? `${this.selection.length} selected — pick a class`
			: "";
	}

	private async assignSelection(cls: number): Promise<void> {
		if (this.selection.length === 0 || !this.sessionId) return; // empty selection: no request
		try {
			await this.client.labelInstances(this.sessionId, this.selection, cls);
			this.selection = [];
			await this.refresh();
		} catch (err) {
			this.showError(err);
		}
	}

	private async requestAlpha(alpha: number): Promise<void> {
		if (this.snapshot?.running) return; // slider disabled while a job runs
		try {
			this.frames = [];
			this.lastFrameIndex = -1;
			this.animationStart = performance.now();
			await this.client.setAlpha(this.sessionId, alpha);
		} catch (err) {
			this.showError(err);
		}
	}

	private async requestRetrain(): Promise<void> {
		try {
			this.frames = [];
			this.lastFrameIndex = -1;
			this.animationStart = performance.now();
			const result = await this.client.retrain(this.sessionId);
			this.accuracyLabel.textContent = `accuracy ${(result.test_accuracy * 100).toFixed(1)}% -> alpha ${result.new_alpha.toFixed(3)}`;
		} catch (err) {
			this.showError(err);
		}
	}

	private async poll(): Promise<void> {
		if (!this.sessionId) return;
		try {
			const snap = await this.client.getState(this.sessionId);
			this.snapshot = snap;
			this.slider.disabled = snap.running;
			this.retrainButton.disabled = snap.running;
			this.alphaLabel.textContent = snap.alpha.toFixed(3);
			this.statusLabel.textContent = snap.running ? `optimizing (iteration ${snap.iteration})` : this.statusLabel.textContent;
			if (snap.running || this.frames.length > 0) {
				const response = await this.client.frames(this.sessionId, this.lastFrameIndex);
				if (response.frames.length > 0) {
					this.frames = mergeFrames(this.frames, response.frames);
					this.lastFrameIndex = this.frames[this.frames.length - 1].frame;
					if (!iterationsMonotone(this.frames)) console.warn("frame stream out of order");
				}
				if (!response.running && this.frames.length > 0) {
					// done: let the animation finish, then drop the buffer
					const elapsed = performance.now() - this.animationStart;
					const playback = playbackAt(this.frames, elapsed, MS_PER_FRAME);
					if (playback?.done) this.frames = [];
				}
			}
			this.scene = buildScene(this.sceneSnapshot(), this.canvas.width, this.canvas.height);
		} catch (err) {
			this.showError(err);
		}
	}

	/** Snapshot with positions swapped for the animated frame when one is playing. */
	private sceneSnapshot(): Snapshot {
		const snap = this.snapshot!;
		if (this.frames.length === 0) return snap;
		const playback = playbackAt(this.frames, performance.now() - this.animationStart, MS_PER_FRAME);
		if (!playback) return snap;
		return { ...snap, points: playback.points, landmarks: playback.landmarks };
	}

	private async refresh(): Promise<void> {
		this.snapshot = await this.client.getState(this.sessionId);
		this.scene = buildScene(this.snapshot, this.canvas.width, this.canvas.height);
	}

	private showError(err: unknown): void {
		const message = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
		this.statusLabel.textContent = message;
	}

	private render(): void {
		const ctx = this.ctx;
		ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
		if (!this.snapshot) {
			ctx.fillStyle = "#666";
			ctx.fillText("no session data", 20, 20);
			return;
		}
		this.scene = buildScene(this.sceneSnapshot(), this.canvas.width, this.canvas.height);
		const scene = this.scene;
		for (const mark of scene.landmarks) {
			ctx.beginPath();
			ctx.arc(mark.x, mark.y, mark.radius, 0, Math.PI * 2);
			ctx.fillStyle = mark.color + "55";
			ctx.fill();
			ctx.strokeStyle = mark.color;
			ctx.lineWidth = 2;
			ctx.stroke();
			ctx.fillStyle = "#222";
			ctx.font = "13px sans-serif";
			ctx.fillText(`${mark.name} (${mark.labelCount})`, mark.x + mark.radius + 4, mark.y - 4);
		}
		const selected = new Set(this.selection);
		for (const mark of scene.points) {
			ctx.beginPath();
			if (mark.shape === "triangle") {
				const r = mark.radius + 1.5;
				ctx.moveTo(mark.x, mark.y - r);
				ctx.lineTo(mark.x - r, mark.y + r);
				ctx.lineTo(mark.x + r, mark.y + r);
				ctx.closePath();
			} else {
				ctx.arc(mark.x, mark.y, mark.radius, 0, Math.PI * 2);
			}
			ctx.fillStyle = mark.fill;
			ctx.fill();
			if (mark.stroke) {
				ctx.strokeStyle = mark.stroke;
				ctx.lineWidth = 2;
				ctx.stroke();
			}
			if (selected.has(mark.index)) {
				ctx.strokeStyle = "#000";
				ctx.lineWidth = 1;
				ctx.setLineDash([2, 2]);
				ctx.stroke();
				ctx.setLineDash([]);
			}
		}
		if (this.lasso.length > 1) {
			ctx.beginPath();
			ctx.moveTo(this.lasso[0][0], this.lasso[0][1]);
			for (const [x, y] of this.lasso.slice(1)) ctx.lineTo(x, y);
			ctx.strokeStyle = "#333";
			ctx.setLineDash([4, 4]);
			ctx.stroke();
			ctx.setLineDash([]);
		}
	}
}

new App().start().catch((err) => {
	document.body.insertAdjacentText("beforeend", `failed to start: ${err}`);
});
