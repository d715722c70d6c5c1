"""The encoder-decoder segmentation network.

Encoder: five VGG-style blocks of 3x3 convolutions + ReLU, each followed by
2x2 max pooling. Decoder: two stride-2 transposed convolutions, each
concatenated with the same-resolution encoder pooling output and mixed by a
3x3 convolution, then one stride-8 transposed convolution back to full
resolution, a final 3x3 convolution and a per-pixel 2-way softmax.
"""

from __future__ import annotations

import json
import zipfile
from dataclasses import asdict, dataclass

import numpy as np

from .layers import (Conv2D, Deconv2D, MaxPool2x2, ReLU, concat_channels,
                     softmax, softmax_xent, split_channels)

CHECKPOINT_FORMAT_VERSION = 1


@dataclass
class NetworkConfig:
    input_side: int = 224
    input_channels: int = 3
    encoder_channels: tuple = (64, 128, 256, 512, 512)
    convs_per_block: tuple = (2, 2, 3, 3, 3)
    decoder_channels: tuple = (256, 128)
    final_upsample_stride: int = 8
    num_classes: int = 2

    def validate(self):
        if self.input_side % 32:
            raise ValueError("input_side must be divisible by 2^5")
        if len(self.encoder_channels) != 5 or len(self.convs_per_block) != 5:
            raise ValueError("exactly five encoder blocks required")
        if len(self.decoder_channels) != 2:
            raise ValueError("two decoder stages required")
        if self.input_channels not in (1, 3, 4):
            raise ValueError("input_channels must be 1, 3 or 4")
        pre_final = self.input_side // 8
        if pre_final * self.final_upsample_stride != self.input_side:
            raise ValueError("final upsample stride does not restore input side")

    @classmethod
    def toy(cls, input_channels=3):
        return cls(input_side=64, input_channels=input_channels,
                   encoder_channels=(8, 16, 32, 64, 64),
                   convs_per_block=(1, 1, 1, 1, 1),
                   decoder_channels=(32, 16))


@dataclass
class TrainConfig:
    batch_size: int = 20
    learning_rate: float = 0.0001
    epochs: int = 23
    momentum: float = 0.0
    shuffle_seed: int = 0
    class_weights: tuple = None   # optional (object, background) loss weights


class Network:
    """Wired layer graph with explicit forward/backward passes."""

    def __init__(self, config: NetworkConfig, seed: int = 0, dtype=np.float64):
        config.validate()
        self.config = config
        self.dtype = dtype
        rng = np.random.default_rng(seed)
        cfg = config

        self.enc_convs = []   # list of per-block conv lists
        self.enc_relus = []
        self.pools = []
        in_ch = cfg.input_channels
        for block, out_ch in enumerate(cfg.encoder_channels):
            convs, relus = [], []
            for _ in range(cfg.convs_per_block[block]):
                convs.append(Conv2D(in_ch, out_ch, 3, rng=rng, dtype=dtype))
                relus.append(ReLU())
                in_ch = out_ch
            self.enc_convs.append(convs)
            self.enc_relus.append(relus)
            self.pools.append(MaxPool2x2())

        d0, d1 = cfg.decoder_channels
        skip4 = cfg.encoder_channels[3]   # pool-4 output channels
        skip3 = cfg.encoder_channels[2]   # pool-3 output channels
        self.up1 = Deconv2D(cfg.encoder_channels[4], d0, 4, 2, rng=rng, dtype=dtype)
        self.up1_relu = ReLU()
        self.mix1 = Conv2D(d0 + skip4, d0, 3, rng=rng, dtype=dtype)
        self.mix1_relu = ReLU()
        self.up2 = Deconv2D(d0, d1, 4, 2, rng=rng, dtype=dtype)
        self.up2_relu = ReLU()
        self.mix2 = Conv2D(d1 + skip3, d1, 3, rng=rng, dtype=dtype)
        self.mix2_relu = ReLU()
        s = cfg.final_upsample_stride
        self.up3 = Deconv2D(d1, cfg.num_classes, s, s, rng=rng, dtype=dtype)
        self.final = Conv2D(cfg.num_classes, cfg.num_classes, 3, rng=rng, dtype=dtype)

        self.epochs_run = 0
        self.final_cost = None

    # ---- parameter plumbing -------------------------------------------------

    def layers(self):
        named = []
        for b, convs in enumerate(self.enc_convs):
            for i, conv in enumerate(convs):
                named.append((f"enc{b}_{i}", conv))
        named += [("up1", self.up1), ("mix1", self.mix1),
                  ("up2", self.up2), ("mix2", self.mix2),
                  ("up3", self.up3), ("final", self.final)]
        return named

    def params(self):
        out = []
        for lname, layer in self.layers():
            for pname, w, g in layer.params():
                out.append((f"{lname}.{pname}", w, g))
        return out

    def zero_grads(self):
        for _, _, g in self.params():
            g[...] = 0.0

    # ---- forward / backward -------------------------------------------------

    def forward_logits(self, x, train=True, record_shapes=None):
        """x: NHWC float input; returns pre-softmax logits."""
        cfg = self.config
        if x.shape[1] != cfg.input_side or x.shape[3] != cfg.input_channels:
            raise ValueError(
                f"input {x.shape} does not match configured "
                f"{cfg.input_side}x{cfg.input_side}x{cfg.input_channels}")
        note = (lambda tag, t: record_shapes.append((tag, t.shape[1:]))) \
            if record_shapes is not None else (lambda tag, t: None)

        pool_outs = []
        for b in range(5):
            for conv, relu in zip(self.enc_convs[b], self.enc_relus[b]):
                x = relu.forward(conv.forward(x, train), train)
            note(f"conv_block{b + 1}", x)
            x = self.pools[b].forward(x, train)
            pool_outs.append(x)
        note("encoder_out", x)

        u1 = self.up1_relu.forward(self.up1.forward(x, train), train)
        note("deconv1", u1)
        c1 = concat_channels(u1, pool_outs[3])
        note("concat1", c1)
        m1 = self.mix1_relu.forward(self.mix1.forward(c1, train), train)
        note("mix1", m1)
        u2 = self.up2_relu.forward(self.up2.forward(m1, train), train)
        note("deconv2", u2)
        c2 = concat_channels(u2, pool_outs[2])
        note("concat2", c2)
        m2 = self.mix2_relu.forward(self.mix2.forward(c2, train), train)
        note("mix2", m2)
        u3 = self.up3.forward(m2, train)
        note("deconv3", u3)
        logits = self.final.forward(u3, train)
        note("logits", logits)
        return logits

    def backward(self, dlogits):
        d = self.up3.backward(self.final.backward(dlogits))
        d = self.mix2.backward(self.mix2_relu.backward(d))
        d_u2, d_skip3 = split_channels(d, self.config.decoder_channels[1])
        d = self.up2.backward(self.up2_relu.backward(d_u2))
        d = self.mix1.backward(self.mix1_relu.backward(d))
        d_u1, d_skip4 = split_channels(d, self.config.decoder_channels[0])
        d = self.up1.backward(self.up1_relu.backward(d_u1))

        skip_grads = {3: d_skip4, 2: d_skip3}
        for b in range(4, -1, -1):
            if b in skip_grads:
                d = d + skip_grads[b]
            d = self.pools[b].backward(d)
            for conv, relu in zip(reversed(self.enc_convs[b]), reversed(self.enc_relus[b])):
                d = conv.backward(relu.backward(d))
        return d

    def loss_and_grads(self, x, target_classes, class_weights=None):
        """Forward + backward for one batch; grads accumulate into layers."""
        logits = self.forward_logits(x, train=True)
        loss, probs, dlogits = softmax_xent(logits, target_classes, class_weights)
        self.backward(dlogits)
        return loss, probs

    # ---- inference ----------------------------------------------------------

    def predict_probs(self, x):
        """Per-pixel class probabilities (softmax over channels)."""
        return softmax(self.forward_logits(np.asarray(x, dtype=self.dtype), train=False))

    def predict_background(self, patch_img):
        """Background-probability tile for one HWC uint8/float patch."""
        x = np.asarray(patch_img, dtype=self.dtype)
        if x.ndim == 2:
            x = x[:, :, None]
        if patch_img.dtype == np.uint8:
            x = x / 255.0
        probs = self.predict_probs(x[None])
        return probs[0, :, :, 1]


def build_network(config: NetworkConfig, seed: int = 0, dtype=np.float64) -> Network:
    return Network(config, seed=seed, dtype=dtype)


# ---- persistence ------------------------------------------------------------

def save_model(net: Network, path) -> None:
    meta = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "config": asdict(net.config),
        "epochs_run": net.epochs_run,
        "final_cost": net.final_cost,
        "dtype": np.dtype(net.dtype).name,
    }
    arrays = {name: w for name, w, _ in net.params()}
    np.savez_compressed(path, __meta__=np.frombuffer(
        json.dumps(meta).encode(), dtype=np.uint8), **arrays)


def load_model(path) -> Network:
    try:
        data = np.load(path)
    except Exception as exc:
        raise ValueError(f"corrupt or unreadable checkpoint {path}: {exc}") from exc
    try:
        with data:
            meta = json.loads(bytes(data["__meta__"]).decode())
            if meta.get("format_version") != CHECKPOINT_FORMAT_VERSION:
                raise ValueError(f"unsupported checkpoint version {meta.get('format_version')}")
            cfg_doc = meta["config"]
            for key in ("encoder_channels", "convs_per_block", "decoder_channels"):
                cfg_doc[key] = tuple(cfg_doc[key])
            config = NetworkConfig(**cfg_doc)
            net = Network(config, dtype=np.dtype(meta["dtype"]))
            for name, w, _ in net.params():
                if name not in data:
                    raise ValueError(f"checkpoint missing weight {name}")
                if data[name].shape != w.shape:
                    raise ValueError(f"checkpoint weight {name} has shape "
                                     f"{data[name].shape}, expected {w.shape}")
                w[...] = data[name]
            net.epochs_run = meta.get("epochs_run", 0)
            net.final_cost = meta.get("final_cost")
            return net
    except (OSError, KeyError, json.JSONDecodeError, zipfile.BadZipFile) as exc:
        raise ValueError(f"corrupt or unreadable checkpoint {path}: {exc}") from exc
