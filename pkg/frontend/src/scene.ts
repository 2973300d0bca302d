import type { Point, Snapshot } from "./types.js";

/** Class hues; index = class id. Matches the server-side SVG palette. */
export const PALETTE = [
	"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
	"#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/** Fill used while the model is untrained. */
export const UNTRAINED_FILL = "#000000";

export const LANDMARK_MIN_RADIUS = 8;
const LANDMARK_AREA_PER_LABEL = 12;

export function classColor(cls: number): string {
	return PALETTE[((cls % PALETTE.length) + PALETTE.length) % PALETTE.length];
}

export interface ViewTransform {
	scale: number;
	offsetX: number;
	offsetY: number;
}

/** Fit all positions into width x height with relative padding; y flipped for screen. */
export function fitViewport(
	positions: Point[],
	width: number,
	height: number,
	padding = 0.08,
): ViewTransform {
	let minX = Infinity;
	let maxX = -Infinity;
	let minY = Infinity;
	let maxY = -Infinity;
	for (const [x, y] of positions) {
		minX = Math.min(minX, x);
		maxX = Math.max(maxX, x);
		minY = Math.min(minY, y);
		maxY = Math.max(maxY, y);
	}
	if (!isFinite(minX)) {
		return { scale: 1, offsetX: width / 2, offsetY: height / 2 };
	}
	const spanX = Math.max(maxX - minX, 1e-9);
	const spanY = Math.max(maxY - minY, 1e-9);
	const usable = 1 - 2 * padding;
	const scale = Math.min((width * usable) / spanX, (height * usable) / spanY);
	const offsetX = width / 2 - scale * (minX + maxX) / 2;
	const offsetY = height / 2 + scale * (minY + maxY) / 2;
	return { scale, offsetX, offsetY };
}

export function project(t: ViewTransform, [x, y]: Point): Point {
	return [t.scale * x + t.offsetX, -t.scale * y + t.offsetY];
}

export interface PointMark {
	index: number;
	x: number;
	y: number;
	shape: "circle" | "triangle";
	fill: string;
	stroke: string | null;
	radius: number;
}

export interface LandmarkMark {
	classIndex: number;
	x: number;
	y: number;
	radius: number;
	color: string;
	name: string;
	labelCount: number;
}

export interface Scene {
	transform: ViewTransform;
	points: PointMark[];
	landmarks: LandmarkMark[];
}

/** Landmark glyph area grows linearly with its label count, radius floored. */
export function landmarkRadius(labelCount: number): number {
	const area = Math.PI * LANDMARK_MIN_RADIUS * LANDMARK_MIN_RADIUS + LANDMARK_AREA_PER_LABEL * labelCount;
	return Math.sqrt(area / Math.PI);
}

/**
 * Pure snapshot -> drawable marks mapping.
 *
 * Unlabeled points render as circles, labeled points as triangles; the fill
 * encodes the predicted class (black while the model is untrained) and the
 * border encodes the user-assigned label.
 */
export function buildScene(snapshot: Snapshot, width: number, height: number): Scene {
	const everything = snapshot.points.concat(snapshot.landmarks);
	const transform = fitViewport(everything, width, height);
	const points: PointMark[] = snapshot.points.map((pos, i) => {
		const [x, y] = project(transform, pos);
		const assigned = snapshot.labels[i];
		const labeled = assigned >= 0;
		return {
			index: i,
			x,
			y,
			shape: labeled ? "triangle" : "circle",
			fill: snapshot.model_trained ? classColor(snapshot.predicted[i]) : UNTRAINED_FILL,
			stroke: labeled ? classColor(assigned) : null,
			radius: 4,
		};
	});
	const landmarks: LandmarkMark[] = snapshot.landmarks.map((pos, u) => {
		const [x, y] = project(transform, pos);
		return {
			classIndex: u,
			x,
			y,
			radius: landmarkRadius(snapshot.label_counts[u] ?? 0),
			color: classColor(u),
			name: snapshot.class_names[u] ?? `c${u}`,
			labelCount: snapshot.label_counts[u] ?? 0,
		};
	});
	return { transform, points, landmarks };
}
