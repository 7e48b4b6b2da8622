"""ResNet-18 adapted to 1-D signals.

Standard translation of the 2-D design: width-7 stride-2 stem plus stride-2
max pooling, then four stages of two basic blocks with width-3 convolutions,
channel widths (w, 2w, 4w, 8w) and stride 2 per stage (total stride 32).
"""
from __future__ import annotations

import torch
import torch.nn as nn


class BasicBlock1d(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, stride: int = 1):
        super().__init__()
        self.conv1 = nn.Conv1d(in_ch, out_ch, 3, stride=stride, padding=1, bias=False)
        self.bn1 = nn.BatchNorm1d(out_ch)
        self.conv2 = nn.Conv1d(out_ch, out_ch, 3, padding=1, bias=False)
        self.bn2 = nn.BatchNorm1d(out_ch)
        self.relu = nn.ReLU(inplace=True)
        self.downsample = None
        if stride != 1 or in_ch != out_ch:
            self.downsample = nn.Sequential(
                nn.Conv1d(in_ch, out_ch, 1, stride=stride, bias=False),
                nn.BatchNorm1d(out_ch),
            )

    def forward(self, x):
        identity = x if self.downsample is None else self.downsample(x)
        out = self.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        return self.relu(out + identity)


class ResNet1dEncoder(nn.Module):
    total_stride = 32

    def __init__(self, in_channels: int = 1, width: int = 64, blocks_per_stage: int = 2):
        super().__init__()
        self.stem = nn.Sequential(
            nn.Conv1d(in_channels, width, 7, stride=2, padding=3, bias=False),
            nn.BatchNorm1d(width),
            nn.ReLU(inplace=True),
            nn.MaxPool1d(3, stride=2, padding=1),
        )
        stages = []
        ch = width
        for i in range(4):
            out_ch = width * (2 ** i)
            blocks = [BasicBlock1d(ch, out_ch, stride=1 if i == 0 else 2)]
            blocks += [BasicBlock1d(out_ch, out_ch) for _ in range(blocks_per_stage - 1)]
            stages.append(nn.Sequential(*blocks))
            ch = out_ch
        self.stages = nn.Sequential(*stages)
        self.out_channels = ch

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] < 8:
            raise ValueError(f"input length {x.shape[-1]} shorter than the stem")
        return self.stages(self.stem(x))
