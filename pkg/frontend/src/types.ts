/** Wire shapes of the listening-test HTTP API. */

export type Aspect = "naturalness" | "speaker_similarity" | "accent_similarity";

export interface LabeledStimulus {
  label: string;
  audio_url: string;
}

export interface Screen {
  utterance_id: string;
  stimuli: LabeledStimulus[];
  reference_url: string | null;
}

export interface Assignment {
  test_id: string;
  listener_id: string;
  aspect: Aspect;
  show_reference: boolean;
  default_slider: number;
  screens: Screen[];
  progress: number;
}

export interface ScreenPayload {
  listener_id: string;
  utterance_id: string;
  scores: Record<string, number>;
}
