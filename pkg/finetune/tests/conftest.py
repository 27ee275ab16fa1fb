from __future__ import annotations

import json
from pathlib import Path

import pytest


def _corpus_records(n: int = 12) -> list[dict]:
    records = []
    for i in range(n):
        window = [
            {"id": 2 * i, "time": f"19:{i:02d}:04", "event": "kitchen induction stove wattmeter turned OFF"},
            {"id": 2 * i + 1, "time": f"19:{i:02d}:40", "event": "living room sofa pressure pad pressure ON"},
        ]
        answer = [
            {"id": 2 * i, "activity": "19. preparing dinner"},
            {"id": 2 * i + 1, "activity": "11. watching tv"},
        ]
        records.append(
            {
                "messages": [
                    {
                        "role": "user",
                        "content": "Infer the activity behind each sensor event.\n"
                        + json.dumps(window),
                    },
                    {
                        "role": "assistant",
                        "content": "<think>\nThe stove turning off in the evening suggests "
                        "cooking just finished, so preparing dinner. The sofa pad points at "
                        "watching tv.\n</think>\n" + json.dumps(answer),
                    },
                ],
                "source": {"dataset": "synthetic", "session_id": f"s{i % 3}", "window_id": i},
                "teacher_model": "teacher-32b",
            }
        )
    return records


@pytest.fixture(scope="session")
def corpus_path(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("corpus") / "corpus.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        for record in _corpus_records():
            fh.write(json.dumps(record) + "\n")
    return path


@pytest.fixture(scope="session")
def tiny_base_model(tmp_path_factory, corpus_path) -> str:
    """A from-scratch miniature student checkpoint (model + tokenizer)."""
    import torch
    from tokenizers import Tokenizer, decoders, models, pre_tokenizers, trainers
    from transformers import AutoModelForCausalLM, PreTrainedTokenizerFast, Qwen3Config

    texts = []
    for line in corpus_path.read_text(encoding="utf-8").splitlines():
        for message in json.loads(line)["messages"]:
            texts.append(message["content"])

    tok = Tokenizer(models.BPE())
    tok.pre_tokenizer = pre_tokenizers.ByteLevel(add_prefix_space=False)
    tok.decoder = decoders.ByteLevel()
    tok.train_from_iterator(texts, trainers.BpeTrainer(vocab_size=400, special_tokens=[]))
    tokenizer = PreTrainedTokenizerFast(tokenizer_object=tok)
    tokenizer.add_special_tokens(
        {
            "additional_special_tokens": ["<|im_start|>", "<|im_end|>"],
            "pad_token": "<|pad|>",
            "eos_token": "<|im_end|>",
        }
    )
    tokenizer.chat_template = (
        "{%- for message in messages -%}<|im_start|>{{ message.role }}\n"
        "{{ message.content }}<|im_end|>\n{%- endfor -%}"
        "{%- if add_generation_prompt -%}<|im_start|>assistant\n{%- endif -%}"
    )

    torch.manual_seed(0)
    config = Qwen3Config(
        vocab_size=len(tokenizer),
        hidden_size=64,
        intermediate_size=128,
        num_hidden_layers=2,
        num_attention_heads=4,
        num_key_value_heads=2,
        head_dim=16,
        max_position_embeddings=4096,
        tie_word_embeddings=True,
        pad_token_id=tokenizer.pad_token_id,
        eos_token_id=tokenizer.eos_token_id,
    )
    model = AutoModelForCausalLM.from_config(config)

    out = tmp_path_factory.mktemp("tiny-student")
    tokenizer.save_pretrained(out)
    model.save_pretrained(out)
    return str(out)


@pytest.fixture
def config_doc(tiny_base_model, corpus_path, tmp_path) -> dict:
    return {
        "base_model": tiny_base_model,
        "corpus": str(corpus_path),
        "output_dir": str(tmp_path / "out"),
        "max_steps": 1,
        "lora_rank": 4,
        "lora_alpha": 8,
        "batch_size": 4,
        "max_seq_len": 256,
        "seed": 0,
    }
