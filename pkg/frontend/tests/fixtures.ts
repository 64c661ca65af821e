/** Recorded gateway event logs used to replay turns against the console. */

import type { StreamEvent } from "../src/types";

/** One-step node-listing turn: reasoning, action, observation, final. */
export const NODE_LIST_TURN: StreamEvent[] = [
  {
    kind: "reasoning",
    iteration: 1,
    text: "The user wants a list of available nodes; call node_list.",
  },
  { kind: "action", iteration: 1, id: "c1", tool: "node_list", args: {} },
  {
    kind: "observation",
    iteration: 1,
    id: "c1",
    content:
      '{"namespace":"/","nodes":["/rosout","/talker","/listener","/parameter_server"],"pattern":".*","total":4}',
    error: false,
  },
  {
    kind: "final",
    text: "Here is a list of available nodes: /rosout, /talker, /listener, /parameter_server",
    reason: "answer",
  },
];

/** Spot walk turn, paused at the gated move confirmation. */
export const SPOT_TURN_UNTIL_CONFIRMATION: StreamEvent[] = [
  { kind: "reasoning", iteration: 1, text: "Stand up before walking." },
  { kind: "action", iteration: 1, id: "c1", tool: "stand_up", args: {} },
  {
    kind: "observation",
    iteration: 1,
    id: "c1",
    content: '{"standing":true,"status":"Spot is now standing up."}',
    error: false,
  },
  {
    kind: "reasoning",
    iteration: 2,
    text: "Walk forward one meter, then turn 15 degrees.",
  },
  {
    kind: "action",
    iteration: 2,
    id: "c2",
    tool: "move",
    args: { distance_m: 1, turn_deg: 15 },
  },
  {
    kind: "confirmation",
    id: "c2",
    tool: "move",
    args: { distance_m: 1, turn_deg: 15 },
  },
];

/** Continuation of the Spot turn after the operator approves. */
export const SPOT_TURN_AFTER_APPROVE: StreamEvent[] = [
  {
    kind: "observation",
    iteration: 2,
    id: "c2",
    content:
      '{"pose":{"theta":15.0,"x":1.0,"y":0.0},"status":"I have moved forward 1 meter(s) and turned 15 degrees."}',
    error: false,
  },
  { kind: "final", text: "I have completed the movement.", reason: "answer" },
];

export function toNdjson(events: StreamEvent[]): string {
  return events.map((event) => JSON.stringify(event) + "\n").join("");
}
