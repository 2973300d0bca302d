/** Wire types for the session service (all endpoints speak JSON). */

export type Point = [number, number];

export interface Snapshot {
	points: Point[];
	landmarks: Point[];
	alpha: number;
	iteration: number;
	running: boolean;
	label_counts: number[];
	/** argmax class per point under the current probabilities */
	predicted: number[];
	/** max probability per point */
	probabilities_summary: number[];
	/** user-assigned label per point; -1 = unlabeled */
	labels: number[];
	class_names: string[];
	model_trained: boolean;
}

export interface Frame {
	frame: number;
	iteration: number;
	points: Point[];
	landmarks: Point[];
}

export interface FramesResponse {
	frames: Frame[];
	running: boolean;
}

export interface CreateResponse {
	id: string;
	n: number;
	m: number;
	alpha: number;
	class_names: string[];
}

export interface RetrainResponse {
	test_accuracy: number;
	new_alpha: number;
}

export interface ApiErrorBody {
	code: string;
	message: string;
}
