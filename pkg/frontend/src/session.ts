/**
 * Session flow state: the current grid with its marks, the pinned
 * carried-relevant strip, the metrics history, and the budget indicator.
 *
 * The flow never invents ranking state: every grid is exactly the page the
 * service returned, in order, and the metrics history is the verbatim
 * content of the last GET /metrics response.
 */
import {
  ApiClient,
  MarkValue,
  MetricsRow,
  Page,
  SessionStatus,
} from "./api.js";

export type CellMark = "unset" | MarkValue;

export interface GridCell {
  id: number;
  rank: number;
  thumbUrl: string;
  mark: CellMark;
}

export interface SessionView {
  sessionId: string;
  scheme: string;
  status: SessionStatus;
  iteration: number;
  totalIterations: number;
  cells: GridCell[];
  carriedRelevant: number[];
  metrics: MetricsRow[];
  unmarkedCount: number;
  canAdvance: boolean;
}

export const SCHEMES = ["wos", "ws-inter", "ws-union", "ws-comb"] as const;
export const TOTAL_ITERATIONS = 7;

export class SessionFlow {
  private sessionId = "";
  private scheme = "";
  private status: SessionStatus = "awaiting_feedback";
  private cells: GridCell[] = [];
  private carriedRelevant: number[] = [];
  private metrics: MetricsRow[] = [];
  private iteration = 0;
  private spans = 1;
  private readonly seenIds = new Set<number>();

  constructor(private readonly client: ApiClient) {}

  async start(queryImageId: number, scheme: string, scope: number): Promise<SessionView> {
    const created = await this.client.createSession(queryImageId, scheme, scope);
    this.sessionId = created.session_id;
    this.scheme = scheme;
    this.status = "awaiting_feedback";
    this.metrics = [];
    this.seenIds.clear();
    this.acceptPage(created.page);
    return this.view();
  }

  /** Cycle one thumbnail: unset -> relevant -> nonrelevant -> relevant ... */
  cycleMark(id: number): SessionView {
    const cell = this.cells.find((c) => c.id === id);
    if (cell) {
      cell.mark = cell.mark === "relevant" ? "nonrelevant" : "relevant";
    }
    return this.view();
  }

  setMark(id: number, mark: CellMark): SessionView {
    const cell = this.cells.find((c) => c.id === id);
    if (cell) {
      cell.mark = mark;
    }
    return this.view();
  }

  /** Bulk action: every still-unset thumbnail becomes non-relevant. */
  markRestNonrelevant(): SessionView {
    for (const cell of this.cells) {
      if (cell.mark === "unset") {
        cell.mark = "nonrelevant";
      }
    }
    return this.view();
  }

  /** Post the marks and render the next page (or the terminal state). */
  async advance(): Promise<SessionView> {
    if (this.status !== "awaiting_feedback") {
      throw new Error(`session is ${this.status}`);
    }
    const unmarked = this.cells.filter((c) => c.mark === "unset").length;
    if (unmarked > 0) {
      throw new Error(`${unmarked} thumbnails still unmarked`);
    }
    const marks: Record<number, MarkValue> = {};
    for (const cell of this.cells) {
      marks[cell.id] = cell.mark as MarkValue;
    }
    const result = await this.client.submitFeedback(this.sessionId, marks);
    this.status = result.status;
    if (result.page !== null) {
      this.acceptPage(result.page);
    } else {
      this.cells = [];
    }
    const metrics = await this.client.getMetrics(this.sessionId);
    this.metrics = metrics.iterations;
    return this.view();
  }

  private acceptPage(page: Page): void {
    for (const cell of page.images) {
      if (this.seenIds.has(cell.id)) {
        throw new Error(`service reshowed image ${cell.id}`);
      }
      this.seenIds.add(cell.id);
    }
    this.cells = page.images.map((cell) => ({
      id: cell.id,
      rank: cell.rank,
      thumbUrl: cell.thumb_url,
      mark: "unset",
    }));
    this.carriedRelevant = [...page.carried_relevant];
    this.iteration = page.iteration;
    this.spans = page.iterations_spanned;
  }

  view(): SessionView {
    const unmarked = this.cells.filter((c) => c.mark === "unset").length;
    return {
      sessionId: this.sessionId,
      scheme: this.scheme,
      status: this.status,
      iteration: Math.min(this.iteration + this.spans - 1, TOTAL_ITERATIONS),
      totalIterations: TOTAL_ITERATIONS,
      cells: this.cells.map((c) => ({ ...c })),
      carriedRelevant: [...this.carriedRelevant],
      metrics: this.metrics.map((row) => ({ ...row })),
      unmarkedCount: unmarked,
      canAdvance: this.status === "awaiting_feedback" && unmarked === 0 && this.cells.length > 0,
    };
  }
}
