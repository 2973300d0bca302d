import type { Point } from "./types.js";

/** Ray-casting point-in-polygon test (screen coordinates). */
export function pointInPolygon([px, py]: Point, polygon: Point[]): boolean {
	if (polygon.length < 3) return false;
	let inside = false;
	for (let i = 0, j = polygon.length - 1; i < polygon.length; j = i++) {
		const [xi, yi] = polygon[i];
		const [xj, yj] = polygon[j];
		const crosses = yi > py !== yj > py && px < ((xj - xi) * (py - yi)) / (yj - yi) + xi;
		if (crosses) inside = !inside;
	}
	return inside;
}

/** Indices of points enclosed by the lasso polygon; empty lasso selects nothing. */
export function selectIndices(points: Point[], polygon: Point[]): number[] {
	if (polygon.length < 3) return [];
	const out: number[] = [];
	points.forEach((p, i) => {
		if (pointInPolygon(p, polygon)) out.push(i);
	});
	return out;
}
