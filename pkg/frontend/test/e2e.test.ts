/**
 * End-to-end labeling loop against the real service: create a session,
 * lasso-label two synthetic classes, retrain, verify the alpha schedule and
 * the frame stream, and check that labeled points render as triangles.
 *
 * Spawns `python3 -m cctsne.cli serve` on a scratch copy of the synthetic
 * dataset; requires the python package to be installed.
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { SessionClient } from "../src/api.js";
import { iterationsMonotone } from "../src/animate.js";
import { selectIndices } from "../src/lasso.js";
import { buildScene } from "../src/scene.js";
import type { Point, Snapshot } from "../src/types.js";

const PORT = 18600 + Math.floor(Math.random() * 400);
const BASE = `http://127.0.0.1:${PORT}`;

let workDir: string;
let server: ChildProcess | null = null;
const client = new SessionClient(BASE);

async function waitForHealth(timeoutMs = 60_000): Promise<void> {
	const deadline = Date.now() + timeoutMs;
	while (Date.now() < deadline) {
		try {
			const body = await client.health();
			if (body.status === "ok") return;
		} catch {
			// not up yet
		}
		await new Promise((r) => setTimeout(r, 250));
	}
	throw new Error("service did not become healthy");
}

async function waitIdle(id: string, timeoutMs = 60_000): Promise<Snapshot> {
	const deadline = Date.now() + timeoutMs;
	for (;;) {
		const snap = await client.getState(id);
		if (!snap.running) return snap;
		if (Date.now() > deadline) throw new Error("job did not finish");
		await new Promise((r) => setTimeout(r, 100));
	}
}

/** Expanded screen-space bounding box around the given scene marks. */
function bboxLasso(snapshot: Snapshot, indices: number[], pad = 6): Point[] {
	const scene = buildScene(snapshot, 760, 760);
	const xs = indices.map((i) => scene.points[i].x);
	const ys = indices.map((i) => scene.points[i].y);
	const minX = Math.min(...xs) - pad;
	const maxX = Math.max(...xs) + pad;
	const minY = Math.min(...ys) - pad;
	const maxY = Math.max(...ys) + pad;
	return [
		[minX, minY],
		[maxX, minY],
		[maxX, maxY],
		[minX, maxY],
	];
}

beforeAll(async () => {
	workDir = mkdtempSync(join(tmpdir(), "cctsne-e2e-"));
	const synth = spawnSync(
		"python3",
		["-m", "cctsne.cli", "synth", "--out-dir", workDir, "--seed", "0"],
		{ encoding: "utf-8" },
	);
	if (synth.status !== 0) {
		throw new Error(`synth failed: ${synth.stderr}`);
	}
	server = spawn(
		"python3",
		[
			"-m", "cctsne.cli", "serve",
			"--features", join(workDir, "features.csv"),
			"--labels", join(workDir, "labels_true.csv"),
			"--port", String(PORT),
			"--iters", "120",
			"--frame-every", "10",
			"--state-dir", join(workDir, "state"),
		],
		{ stdio: ["ignore", "inherit", "inherit"] },
	);
	await waitForHealth();
}, 120_000);

afterAll(() => {
	server?.kill("SIGINT");
	rmSync(workDir, { recursive: true, force: true });
});

describe("visual-interactive labeling loop", () => {
	it("drives create -> lasso label -> retrain -> animated frames -> triangles", async () => {
		const created = await client.createSession({ n_classes: 4 });
		expect(created.alpha).toBe(0);
		expect(created.n).toBe(408);
		expect(created.m).toBe(4);

		let snap = await client.getState(created.id);
		expect(snap.model_trained).toBe(false);

		// lasso the well-separated class-2 cluster (rows 200..299) and one of
		// the class-3 clusters (rows 300..349) in screen space
		const lasso2 = bboxLasso(snap, range(200, 300));
		const scene = buildScene(snap, 760, 760);
		const positions: Point[] = scene.points.map((p) => [p.x, p.y]);
		const picked2 = selectIndices(positions, lasso2);
		expect(picked2.length).toBeGreaterThanOrEqual(90);
		await client.labelInstances(created.id, picked2, 2);

		const lasso3 = bboxLasso(snap, range(300, 350));
		const picked3 = selectIndices(positions, lasso3).filter((i) => !picked2.includes(i));
		expect(picked3.length).toBeGreaterThanOrEqual(40);
		const counts = await client.labelInstances(created.id, picked3, 3);
		expect(counts.label_counts[3]).toBeGreaterThanOrEqual(40);

		// retrain: alpha must equal the squared held-out accuracy exactly
		const retrained = await client.retrain(created.id);
		expect(retrained.new_alpha).toBe(retrained.test_accuracy ** 2);

		snap = await waitIdle(created.id);
		expect(snap.alpha).toBe(retrained.new_alpha);
		expect(snap.model_trained).toBe(true);

		// frame stream: at least two frames, iterations monotone
		const stream = await client.frames(created.id, -1);
		expect(stream.frames.length).toBeGreaterThanOrEqual(2);
		expect(iterationsMonotone(stream.frames)).toBe(true);
		expect(stream.frames[stream.frames.length - 1].iteration).toBe(120);

		// labeled points now render as triangles with the label hue border
		const finalScene = buildScene(snap, 760, 760);
		for (const i of picked2.slice(0, 25)) {
			expect(finalScene.points[i].shape).toBe("triangle");
		}
		for (const i of picked3.slice(0, 25)) {
			expect(finalScene.points[i].shape).toBe("triangle");
		}
		const unlabeled = finalScene.points.filter((p) => snap.labels[p.index] < 0);
		for (const mark of unlabeled.slice(0, 25)) {
			expect(mark.shape).toBe("circle");
		}
	}, 120_000);

	it("second alpha change replays from the current positions", async () => {
		const created = await client.createSession({ n_classes: 4 });
		const before = await client.getState(created.id);
		await client.setAlpha(created.id, 0.5);
		await waitIdle(created.id);
		const stream = await client.frames(created.id, -1);
		expect(stream.frames.length).toBeGreaterThanOrEqual(2);
		const first = stream.frames[0];
		expect(first.points[0][0]).toBeCloseTo(before.points[0][0], 12);
		expect(iterationsMonotone(stream.frames)).toBe(true);
	}, 120_000);
});

function range(start: number, stop: number): number[] {
	return Array.from({ length: stop - start }, (_, k) => start + k);
}
