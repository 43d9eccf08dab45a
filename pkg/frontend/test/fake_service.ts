/**
 * In-memory stand-in for the session service, implementing the same
 * endpoint contract: no image is ever shown twice, feedback pages carry
 * scope - |relevant| images, the combination scheme presents the
 * segment-based and global lists as its first two iterations, and the
 * budget is seven iteration slots.
 */
import type { MarkValue, MetricsRow } from "../src/api.js";

const TOTAL_SLOTS = 7;
const DATABASE_SIZE = 60;
const CATEGORY_SIZE = 10;

interface FakeSession {
  id: string;
  scheme: string;
  scope: number;
  query: number;
  shown: number[];
  pageIds: number[];
  relevant: Set<number>;
  marksByIteration: { ids: number[]; marks: Record<number, boolean>; spans: number }[];
  slotsUsed: number;
  pendingWos: number[] | null;
  status: "awaiting_feedback" | "converged" | "exhausted";
}

export class FakeService {
  private sessions = new Map<string, FakeSession>();
  private counter = 0;
  lastMetricsResponse: { session_id: string; iterations: MetricsRow[] } | null = null;

  /** fetch-compatible entry point. */
  fetch = async (input: string, init?: RequestInit): Promise<Response> => {
    const url = new URL(input, "http://fake");
    const body = init?.body ? JSON.parse(String(init.body)) : {};
    if (url.pathname === "/sessions" && init?.method === "POST") {
      return this.create(body);
    }
    const feedback = url.pathname.match(/^\/sessions\/([^/]+)\/feedback$/);
    if (feedback && init?.method === "POST") {
      return this.feedback(feedback[1], body.marks ?? {});
    }
    const metrics = url.pathname.match(/^\/sessions\/([^/]+)\/metrics$/);
    if (metrics) {
      return this.metrics(metrics[1]);
    }
    return json(404, { code: "not_found", message: url.pathname });
  };

  private wsList(query: number, scope: number): number[] {
    const ids = [query];
    for (let k = 1; ids.length < scope; k++) ids.push((query + 2 * k) % DATABASE_SIZE);
    return [...new Set(ids)].slice(0, scope);
  }

  private wosList(query: number, scope: number): number[] {
    const ids = [query];
    for (let k = 1; ids.length < scope; k++) ids.push((query + 3 * k) % DATABASE_SIZE);
    return [...new Set(ids)].slice(0, scope);
  }

  private create(body: {
    query_image_id: number;
    scheme: string;
    scope?: number;
  }): Response {
    if (body.query_image_id >= DATABASE_SIZE || body.query_image_id < 0) {
      return json(404, { code: "unknown_image", message: `no image ${body.query_image_id}` });
    }
    const scope = body.scope ?? 20;
    const id = `fake-${this.counter++}`;
    const session: FakeSession = {
      id,
      scheme: body.scheme,
      scope,
      query: body.query_image_id,
      shown: [],
      pageIds: [],
      relevant: new Set(),
      marksByIteration: [],
      slotsUsed: 0,
      pendingWos: null,
      status: "awaiting_feedback",
    };
    let first: number[];
    let spans = 1;
    const ws = this.wsList(session.query, scope);
    const wos = this.wosList(session.query, scope);
    if (body.scheme === "ws-comb") {
      first = ws;
      session.pendingWos = wos;
    } else if (body.scheme === "ws-union") {
      first = [...new Set([...wos, ...ws])];
      spans = 2;
    } else if (body.scheme === "ws-inter") {
      first = [...new Set([...wos.filter((i) => ws.includes(i)), ...ws, ...wos])].slice(0, scope);
    } else {
      first = wos;
    }
    this.display(session, first, spans);
    this.sessions.set(id, session);
    return json(200, { session_id: id, page: this.pagePayload(session, spans) });
  }

  private display(session: FakeSession, ids: number[], spans: number): void {
    session.pageIds = ids;
    session.shown.push(...ids);
    session.slotsUsed += spans;
    session.marksByIteration.push({ ids, marks: {}, spans });
  }

  private pagePayload(session: FakeSession, spans: number) {
    return {
      iteration: session.slotsUsed - spans + 1,
      iterations_spanned: spans,
      images: session.pageIds.map((imageId, k) => ({
        id: imageId,
        rank: k + 1,
        thumb_url: `/images/${imageId}?variant=thumb`,
      })),
      carried_relevant: [...session.relevant].sort((a, b) => a - b),
    };
  }

  private feedback(sessionId: string, marks: Record<string, MarkValue>): Response {
    const session = this.sessions.get(sessionId);
    if (!session) {
      return json(404, { code: "unknown_session", message: sessionId });
    }
    const keys = Object.keys(marks).map(Number).sort((a, b) => a - b);
    const expected = [...session.pageIds].sort((a, b) => a - b);
    if (JSON.stringify(keys) !== JSON.stringify(expected)) {
      return json(409, { code: "incomplete_marks", message: "marks must cover the page" });
    }
    const record = session.marksByIteration[session.marksByIteration.length - 1];
    for (const [key, value] of Object.entries(marks)) {
      const imageId = Number(key);
      record.marks[imageId] = value === "relevant";
      if (value === "relevant") session.relevant.add(imageId);
    }
    session.relevant.add(session.query); // the query is relevant by definition
    record.marks[session.query] = true;

    if (session.pendingWos) {
      const second = session.pendingWos.filter((i) => !session.shown.includes(i));
      session.pendingWos = null;
      if (second.length > 0) {
        this.display(session, second, 1);
        return json(200, {
          session_id: sessionId,
          status: session.status,
          page: this.pagePayload(session, 1),
        });
      }
      session.slotsUsed += 1;
    }
    if (session.relevant.size >= session.scope) {
      session.status = "converged";
      return json(200, { session_id: sessionId, status: "converged", page: null });
    }
    if (session.slotsUsed >= TOTAL_SLOTS) {
      session.status = "exhausted";
      return json(200, { session_id: sessionId, status: "exhausted", page: null });
    }
    const pool = [];
    for (let i = 0; i < DATABASE_SIZE && pool.length < session.scope - session.relevant.size; i++) {
      if (!session.shown.includes(i)) pool.push(i);
    }
    if (pool.length === 0) {
      session.status = "exhausted";
      return json(200, { session_id: sessionId, status: "exhausted", page: null });
    }
    this.display(session, pool, 1);
    return json(200, {
      session_id: sessionId,
      status: session.status,
      page: this.pagePayload(session, 1),
    });
  }

  private metrics(sessionId: string): Response {
    const session = this.sessions.get(sessionId);
    if (!session) {
      return json(404, { code: "unknown_session", message: sessionId });
    }
    const rows: MetricsRow[] = [];
    let shown = 0;
    let relevant = 0;
    for (const record of session.marksByIteration) {
      shown += record.ids.length;
      relevant += record.ids.filter((i) => record.marks[i]).length;
      const precision = (100 * relevant) / shown;
      for (let s = 0; s < record.spans; s++) {
        rows.push({
          iteration: rows.length + 1,
          shown,
          relevant,
          precision,
          recall: (100 * relevant) / CATEGORY_SIZE,
          re: Math.min(100, (100 * relevant) / session.scope),
          fd: 100 - precision,
        });
      }
    }
    while (rows.length < TOTAL_SLOTS) {
      rows.push({ ...rows[rows.length - 1], iteration: rows.length + 1 });
    }
    const payload = { session_id: sessionId, iterations: rows.slice(0, TOTAL_SLOTS) };
    this.lastMetricsResponse = JSON.parse(JSON.stringify(payload));
    return json(200, payload);
  }
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}
