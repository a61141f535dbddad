#!/usr/bin/env python3
"""Freeze reference token counts for the tokenizer test fixtures.

Encodes every fixture string (and each string with an "a" prepended) with the
GPT-2 BPE pipeline from the `tokenizers` library, using the bundled
data/gpt2 files, and writes tests/fixtures/token_counts.json. Rerun after
regenerating the BPE data.
"""
import json
import os

from transformers.models.gpt2.tokenization_gpt2 import GPT2Tokenizer

FIXTURES = [
    "",
    "hello world",
    "Hello, world!",
    "The quick brown fox jumps over the lazy dog.",
    "the quick brown fox",
    "pragma solidity ^0.4.24;",
    "pragma solidity ^0.8.19;",
    "function transfer(address _to, uint256 _value) public returns (bool) {",
    "msg.sender.call.value(amount)();",
    "require(balances[msg.sender] >= _value);",
    "uint256 public totalSupply;",
    "mapping(address => uint256) balances;",
    "modifier onlyOwner() { require(msg.sender == owner); _; }",
    "emit Transfer(from, to, value);",
    "contract Token is Ownable { using SafeMath for uint256; }",
    "block.timestamp",
    "tx.origin",
    "keccak256(abi.encodePacked(nonce, msg.sender))",
    "0x0000000000000000000000000000000000000000",
    "0x1F2a9c",
    "12345",
    "3.14159 2.71828",
    "x = 42;",
    "1 ether 10 finney 1000 wei",
    "a   \n\n  b",
    "  leading",
    "trailing  ",
    "\n\n\n",
    "\t\tindent",
    "a \n b",
    " ",
    "   ",
    "one two  three   four",
    "it's a test",
    "we're can't don't",
    "I'll we've he'd",
    "it'S A Test",
    "naïve café",
    "Ωμέγα λόγος",
    "Привет мир",
    "日本語のテキスト",
    "emoji 🚀 rocket",
    "!!! ??? ...",
    "a+b-c*d/e",
    "((()))",
    "// comment /* block */",
    "balances[msg.sender] -= amount; balances[to] += amount;",
    "for (uint256 i = 0; i < holders.length; i++) { holders[i].send(share); }",
    "revert(\"insufficient balance\")",
    "withdraw withdraws withdrawing withdrawal",
]


def main():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    data = os.path.join(root, "data", "gpt2")
    vocab = json.load(open(os.path.join(data, "vocab.json"), encoding="utf-8"))
    merges = []
    with open(os.path.join(data, "merges.txt"), encoding="utf-8") as f:
        for line in f.read().split("\n")[1:]:
            if line:
                a, b = line.split(" ")
                merges.append((a, b))
    tok = GPT2Tokenizer(vocab=vocab, merges=merges)

    assert len(FIXTURES) == 50, len(FIXTURES)
    entries = []
    for text in FIXTURES:
        ids = tok.encode(text)
        ids_prefixed = tok.encode("a" + text)
        entries.append({
            "text": text,
            "ids": ids,
            "count": len(ids),
            "count_prefixed": len(ids_prefixed),
        })
        if len(ids_prefixed) < len(ids):
            raise SystemExit(f"prefix monotonicity broken for {text!r}")

    out = os.path.join(root, "tests", "fixtures", "token_counts.json")
    with open(out, "w", encoding="utf-8") as f:
        json.dump(entries, f, ensure_ascii=False, indent=1)
        f.write("\n")
    print(f"wrote {out} ({len(entries)} fixtures)")


if __name__ == "__main__":
    main()
