#!/usr/bin/env python3
"""Scoring server for the scalarexp wire protocol, backed by a Hugging Face model.

    python tools/lm_server.py --model bert-base-uncased --mode masked_slot --port 8600
    python tools/lm_server.py --model gpt2 --mode continuation --port 8601

Endpoints: GET /info, GET /vocabulary, POST /score (see README).
"""

from __future__ import annotations

import argparse
import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import torch

log = logging.getLogger("lm_server")

MODES = ("masked_slot", "continuation")


class RequestError(ValueError):
    pass


def _slot_text(full_text: str, span) -> tuple[str, str]:
    # Spans are byte offsets into the UTF-8 text.
    raw = full_text.encode("utf-8")
    begin, end = int(span[0]), int(span[1])
    if not 0 <= begin <= end <= len(raw):
        raise RequestError("slot_span out of range")
    return raw[:begin].decode("utf-8"), raw[end:].decode("utf-8")


class Scorer:
    def __init__(self, model_name: str, mode: str, model_id: str | None = None, batch_size: int = 64,
                 prepend_bos: bool = True):
        from transformers import AutoModelForCausalLM, AutoModelForMaskedLM, AutoTokenizer

        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.mode = mode
        self.model_id = model_id or model_name
        self.batch_size = batch_size
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        loader = AutoModelForMaskedLM if mode == "masked_slot" else AutoModelForCausalLM
        self.model = loader.from_pretrained(model_name)
        self.model.eval()
        self.prepend_bos = prepend_bos and self.tokenizer.bos_token_id is not None
        if mode == "masked_slot" and self.tokenizer.mask_token is None:
            raise ValueError(f"{model_name} has no mask token")
        self.lock = threading.Lock()

    def vocabulary(self) -> list[str]:
        return self.tokenizer.convert_ids_to_tokens(list(range(len(self.tokenizer))))

    def score(self, request: dict) -> list[dict]:
        try:
            model_id = request["model_id"]
            mode = request["mode"]
            candidates = list(request["candidates"])
        except (KeyError, TypeError) as e:
            raise RequestError(f"malformed request: {e}") from e
        if model_id != self.model_id:
            raise RequestError(f"request for model '{model_id}' sent to '{self.model_id}'")
        if mode != self.mode:
            raise RequestError(f"this server answers {self.mode} requests, not {mode}")
        if any(not isinstance(c, str) or not c.strip() for c in candidates):
            raise RequestError("empty candidate")
        with self.lock, torch.no_grad():
            if mode == "masked_slot":
                return self._masked(request, candidates)
            return self._continuation(request, candidates)

    def _masked(self, request: dict, candidates: list[str]) -> list[dict]:
        left, right = _slot_text(request["full_text"], request["slot_span"])
        enc = self.tokenizer(left + self.tokenizer.mask_token + right, return_tensors="pt")
        positions = (enc["input_ids"][0] == self.tokenizer.mask_token_id).nonzero()
        if len(positions) != 1:
            raise RequestError("construction must produce exactly one mask position")
        logits = self.model(**enc).logits[0, positions[0, 0]]
        logp = torch.log_softmax(logits.double(), dim=-1)
        out = []
        for cand in candidates:
            pieces = self.tokenizer.tokenize(cand)
            ids = self.tokenizer.convert_tokens_to_ids(pieces)
            if len(ids) == 1 and ids[0] != self.tokenizer.unk_token_id:
                out.append({"candidate": cand, "logprob": float(logp[ids[0]]), "token_count": 1})
            else:
                # multi-piece or unknown: no single position can be read
                out.append({"candidate": cand, "logprob": None, "token_count": len(pieces)})
        return out

    def _continuation(self, request: dict, candidates: list[str]) -> list[dict]:
        context = request["prefix"].rstrip(" \t")
        ctx = self.tokenizer(context, add_special_tokens=False)["input_ids"]
        if self.prepend_bos:
            ctx = [self.tokenizer.bos_token_id] + ctx
        pad = self.tokenizer.pad_token_id
        if pad is None:
            pad = self.tokenizer.eos_token_id if self.tokenizer.eos_token_id is not None else 0
        out = []
        for start in range(0, len(candidates), self.batch_size):
            chunk = candidates[start:start + self.batch_size]
            cand_ids = [self.tokenizer(" " + c, add_special_tokens=False)["input_ids"] for c in chunk]
            unk = self.tokenizer.unk_token_id
            for c, pieces in zip(chunk, cand_ids):
                if unk is not None and unk in pieces and unk not in (pad, self.tokenizer.eos_token_id):
                    raise RequestError(f"candidate '{c}' contains an unknown token")
            width = len(ctx) + max(len(c) for c in cand_ids)
            ids = torch.full((len(chunk), width), pad, dtype=torch.long)
            mask = torch.zeros((len(chunk), width), dtype=torch.long)
            for row, c in enumerate(cand_ids):
                seq = ctx + c
                ids[row, :len(seq)] = torch.tensor(seq)
                mask[row, :len(seq)] = 1
            logp = torch.log_softmax(self.model(input_ids=ids, attention_mask=mask).logits.double(), dim=-1)
            for row, (cand, c) in enumerate(zip(chunk, cand_ids)):
                # token j of the candidate is predicted at position len(ctx) + j - 1
                total = sum(float(logp[row, len(ctx) + j - 1, tok]) for j, tok in enumerate(c))
                out.append({"candidate": cand, "logprob": total, "token_count": len(c)})
        return out


def make_handler(scorer: Scorer):
    class Handler(BaseHTTPRequestHandler):
        def _send(self, status: int, body, content_type="application/json"):
            data = body if isinstance(body, bytes) else json.dumps(body).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def do_GET(self):
            if self.path == "/info":
                self._send(200, {"model_id": scorer.model_id, "mode": scorer.mode})
            elif self.path == "/vocabulary":
                self._send(200, scorer.vocabulary())
            else:
                self._send(404, b"not found", "text/plain")

        def do_POST(self):
            if self.path != "/score":
                self._send(404, b"not found", "text/plain")
                return
            try:
                length = int(self.headers.get("Content-Length", 0))
                request = json.loads(self.rfile.read(length))
                self._send(200, scorer.score(request))
            except (RequestError, json.JSONDecodeError) as e:
                self._send(400, str(e).encode("utf-8"), "text/plain")

        def log_message(self, fmt, *args):
            log.debug(fmt, *args)

    return Handler


def serve(scorer: Scorer, host: str, port: int) -> ThreadingHTTPServer:
    return ThreadingHTTPServer((host, port), make_handler(scorer))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", required=True, help="Hugging Face model name or local directory")
    ap.add_argument("--mode", required=True, choices=MODES)
    ap.add_argument("--model-id", help="identifier reported in /info (default: --model)")
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8600)
    ap.add_argument("--batch-size", type=int, default=64)
    ap.add_argument("--no-bos", action="store_true", help="do not prepend the BOS token to continuation contexts")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
    scorer = Scorer(args.model, args.mode, args.model_id, args.batch_size, prepend_bos=not args.no_bos)
    server = serve(scorer, args.host, args.port)
    log.info("serving %s (%s) on http://%s:%d", scorer.model_id, scorer.mode, args.host, server.server_address[1])
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
