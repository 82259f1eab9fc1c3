"""Checks tools/lm_server.py against tiny randomly initialised BERT and GPT-2
models written to a temp directory (no downloads)."""

import json
import math
import sys
import threading
import urllib.error
import urllib.request
from pathlib import Path

import pytest

torch = pytest.importorskip("torch")
transformers = pytest.importorskip("transformers")

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))
import lm_server  # noqa: E402

WORDS = ["all", "each", "every", "few", "half", "much", "many", "most", "some", "i", "like", "country", "music",
         "but", "not", ",", "."]


@pytest.fixture(scope="module")
def bert_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("bert")
    vocab = {w: i for i, w in enumerate(["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + WORDS)}
    tok = transformers.BertTokenizerFast(vocab=vocab, do_lower_case=True)
    tok.save_pretrained(d)
    torch.manual_seed(0)
    cfg = transformers.BertConfig(vocab_size=len(tok), hidden_size=16, num_hidden_layers=1, num_attention_heads=2,
                                  intermediate_size=32, max_position_embeddings=64)
    transformers.BertForMaskedLM(cfg).save_pretrained(d)
    return d


@pytest.fixture(scope="module")
def gpt2_dir(tmp_path_factory):
    from transformers.convert_slow_tokenizer import bytes_to_unicode

    d = tmp_path_factory.mktemp("gpt2")
    chars = list(bytes_to_unicode().values())
    vocab = {c: i for i, c in enumerate(chars)}
    merges = [("b", "i"), ("bi", "g"), ("Ġ", "big")]
    for a, b in merges:
        vocab[a + b] = len(vocab)
    vocab["<|endoftext|>"] = len(vocab)
    tok = transformers.GPT2TokenizerFast(vocab=vocab, merges=merges)
    tok.save_pretrained(d)
    torch.manual_seed(1)
    cfg = transformers.GPT2Config(vocab_size=len(vocab), n_positions=64, n_embd=16, n_layer=1, n_head=2,
                                  bos_token_id=vocab["<|endoftext|>"], eos_token_id=vocab["<|endoftext|>"])
    transformers.GPT2LMHeadModel(cfg).save_pretrained(d)
    return d


def masked_request(candidates, model_id="tiny-bert"):
    left = "I like some, but not "
    full = left + "all, country music."
    return {"model_id": model_id, "mode": "masked_slot", "prefix": left, "full_text": full,
            "slot_span": [len(left), len(left) + 3], "candidates": candidates}


def continuation_request(candidates, model_id="tiny-gpt2"):
    prefix = "The elephant is big, but not "
    full = prefix + "enormous"
    return {"model_id": model_id, "mode": "continuation", "prefix": prefix, "full_text": full,
            "slot_span": [len(prefix), len(full)], "candidates": candidates}


def test_masked_scores_are_the_softmax_at_the_mask(bert_dir):
    s = lm_server.Scorer(str(bert_dir), "masked_slot", "tiny-bert")
    quants = ["each", "every", "few", "half", "much", "many", "most", "all"]
    res = s.score(masked_request(quants + ["enormous"]))
    assert [r["candidate"] for r in res] == quants + ["enormous"]
    assert res[-1]["logprob"] is None  # [UNK] in this vocabulary

    # independent forward pass on hand-built ids
    tok, model = s.tokenizer, s.model
    ids = [tok.cls_token_id] + tok.convert_tokens_to_ids(["i", "like", "some", ",", "but", "not"]) + \
          [tok.mask_token_id] + tok.convert_tokens_to_ids([",", "country", "music", "."]) + [tok.sep_token_id]
    with torch.no_grad():
        logits = model(input_ids=torch.tensor([ids])).logits[0, 7].double()
    z = torch.logsumexp(logits, -1)
    for r in res[:-1]:
        want = float(logits[tok.convert_tokens_to_ids(r["candidate"])] - z)
        assert r["logprob"] == pytest.approx(want, abs=1e-9)
    assert sum(math.exp(r["logprob"]) for r in res[:-1]) < 1.0


def test_continuation_chain_rule_and_batching(gpt2_dir):
    s = lm_server.Scorer(str(gpt2_dir), "continuation", "tiny-gpt2", batch_size=2)
    cands = ["big", "huge", "enormous", "gigantic", "large"]
    res = s.score(continuation_request(cands))
    assert res[0]["token_count"] == 1  # " big" is a merged piece
    assert res[1]["token_count"] == 5  # " h" is not merged: "Ġ" "h" "u" "g" "e"

    tok, model = s.tokenizer, s.model
    ctx = [tok.bos_token_id] + tok("The elephant is big, but not", add_special_tokens=False)["input_ids"]
    for r in res:
        pieces = tok(" " + r["candidate"], add_special_tokens=False)["input_ids"]
        total = 0.0
        for j, p in enumerate(pieces):
            with torch.no_grad():
                logits = model(input_ids=torch.tensor([ctx + pieces[:j]])).logits[0, -1].double()
            total += float(logits[p] - torch.logsumexp(logits, -1))
        assert r["logprob"] == pytest.approx(total, abs=1e-5)
        single = s.score(continuation_request([r["candidate"]]))[0]
        assert single["logprob"] == pytest.approx(r["logprob"], abs=1e-5)


def test_request_validation(gpt2_dir):
    s = lm_server.Scorer(str(gpt2_dir), "continuation", "tiny-gpt2")
    with pytest.raises(lm_server.RequestError):
        s.score(continuation_request(["big"], model_id="other"))
    with pytest.raises(lm_server.RequestError):
        s.score(dict(continuation_request(["big"]), mode="masked_slot"))
    with pytest.raises(lm_server.RequestError):
        s.score(continuation_request([" "]))


def test_http_endpoints(gpt2_dir):
    s = lm_server.Scorer(str(gpt2_dir), "continuation", "tiny-gpt2")
    server = lm_server.serve(s, "127.0.0.1", 0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    try:
        info = json.loads(urllib.request.urlopen(base + "/info").read())
        assert info == {"model_id": "tiny-gpt2", "mode": "continuation"}
        vocab = json.loads(urllib.request.urlopen(base + "/vocabulary").read())
        assert len(vocab) == len(s.tokenizer)
        body = json.dumps(continuation_request(["big", "huge"])).encode()
        reply = json.loads(urllib.request.urlopen(urllib.request.Request(base + "/score", data=body)).read())
        assert reply == s.score(continuation_request(["big", "huge"]))
        bad = json.dumps(continuation_request(["big"], model_id="x")).encode()
        with pytest.raises(urllib.error.HTTPError) as e:
            urllib.request.urlopen(urllib.request.Request(base + "/score", data=bad))
        assert e.value.code == 400
    finally:
        server.shutdown()
