import type { Frame, Point } from "./types.js";

/** Merge newly polled frames into the buffer, deduplicating by frame index. */
export function mergeFrames(buffer: Frame[], incoming: Frame[]): Frame[] {
	const known = new Set(buffer.map((f) => f.frame));
	const fresh = incoming.filter((f) => !known.has(f.frame));
	return buffer.concat(fresh).sort((a, b) => a.frame - b.frame);
}

/** True when iteration indices never decrease across the stream. */
export function iterationsMonotone(frames: Frame[]): boolean {
	for (let i = 1; i < frames.length; i++) {
		if (frames[i].iteration < frames[i - 1].iteration) return false;
	}
	return true;
}

/** Linear interpolation between two served frames; no extrapolation beyond them. */
export function interpolatePositions(a: Point[], b: Point[], t: number): Point[] {
	const clamped = Math.max(0, Math.min(1, t));
	return a.map(([x, y], i) => {
		const [bx, by] = b[i];
		return [x + (bx - x) * clamped, y + (by - y) * clamped];
	});
}

export interface PlaybackState {
	points: Point[];
	landmarks: Point[];
	iteration: number;
	done: boolean;
}

/**
 * Position of the animation at `elapsed` ms into a frame stream played at
 * `msPerFrame` per served interval. Always a served frame or a linear blend
 * of two adjacent served frames.
 */
export function playbackAt(frames: Frame[], elapsed: number, msPerFrame: number): PlaybackState | null {
	if (frames.length === 0) return null;
	if (frames.length === 1 || elapsed <= 0) {
		const f = frames[0];
		return { points: f.points, landmarks: f.landmarks, iteration: f.iteration, done: frames.length === 1 };
	}
	const steps = frames.length - 1;
	const progress = elapsed / msPerFrame;
	if (progress >= steps) {
		const last = frames[steps];
		return { points: last.points, landmarks: last.landmarks, iteration: last.iteration, done: true };
	}
	const k = Math.floor(progress);
	const t = progress - k;
	const a = frames[k];
	const b = frames[k + 1];
	return {
		points: interpolatePositions(a.points, b.points, t),
		landmarks: interpolatePositions(a.landmarks, b.landmarks, t),
		iteration: t < 1 ? a.iteration : b.iteration,
		done: false,
	};
}
