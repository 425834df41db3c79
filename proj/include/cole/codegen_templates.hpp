// Copyright 2026 The COLE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Fixed text blocks used by the code emitters. Kept verbatim; the comment
// template carries `{slot}` placeholders filled by emit_comment_addon().

#include <string_view>

namespace cole::codegen::templates {

inline constexpr std::string_view kReluConvBnHelper =
    R"(class ReLU_Conv2d_BatchNorm(nn.Module):
  def __init__(self, channels, kernel_size, stride, padding):
    super().__init__()
    self.op = nn.Sequential(
      nn.ReLU(inplace=False),
      nn.Conv2d(channels, channels, kernel_size, stride=stride, padding=padding, bias=False),
      nn.BatchNorm2d(channels)
    )
  def forward(self, x):
    return self.op(x)
)";

// Canonical NAS-Bench-201 building blocks referenced by the backbone.
inline constexpr std::string_view kBackboneHelpers =
    R"(class ReLUConvBN(nn.Module):
  def __init__(self, C_in, C_out, kernel_size, stride, padding, dilation, affine, track_running_stats=True):
    super(ReLUConvBN, self).__init__()
    self.op = nn.Sequential(
      nn.ReLU(inplace=False),
      nn.Conv2d(C_in, C_out, kernel_size, stride=stride, padding=padding, dilation=dilation, bias=not affine),
      nn.BatchNorm2d(C_out, affine=affine, track_running_stats=track_running_stats)
    )

  def forward(self, x):
    return self.op(x)

class ResNetBasicblock(nn.Module):
  def __init__(self, inplanes, planes, stride, affine=True, track_running_stats=True):
    super(ResNetBasicblock, self).__init__()
    assert stride == 1 or stride == 2, 'invalid stride {:}'.format(stride)
    self.conv_a = ReLUConvBN(inplanes, planes, 3, stride, 1, 1, affine, track_running_stats)
    self.conv_b = ReLUConvBN(planes, planes, 3, 1, 1, 1, affine, track_running_stats)
    if stride == 2:
      self.downsample = nn.Sequential(
        nn.AvgPool2d(kernel_size=2, stride=2, padding=0),
        nn.Conv2d(inplanes, planes, kernel_size=1, stride=1, padding=0, bias=False)
      )
    elif inplanes != planes:
      self.downsample = ReLUConvBN(inplanes, planes, 1, 1, 0, 1, affine, track_running_stats)
    else:
      self.downsample = None
    self.in_dim = inplanes
    self.out_dim = planes
    self.stride = stride
    self.num_conv = 2

  def forward(self, inputs):
    basicblock = self.conv_a(inputs)
    basicblock = self.conv_b(basicblock)
    if self.downsample is not None:
      residual = self.downsample(inputs)
    else:
      residual = inputs
    return residual + basicblock
)";

inline constexpr std::string_view kBackboneNetwork =
    R"(class Network(nn.Module):
  def __init__(self, channels, N, genotype, num_classes):
    super(Network, self).__init__()
    self.C = channels
    self.N = N
    self.stem = nn.Sequential(
      nn.Conv2d(3, self.C, kernel_size=3, padding=1, bias=False),
      nn.BatchNorm2d(self.C)
    )

    layer_channels = [self.C] * N + [self.C * 2] + [self.C * 2] * N + [self.C * 4] + [self.C * 4] * N
    layer_reductions = [False] * N + [True] + [False] * N + [True] + [False] * N

    C_prev = self.C
    self.cells = nn.ModuleList()
    for index, (C_curr, reduction) in enumerate(
      zip(layer_channels, layer_reductions)
    ):
      if reduction:
        cell = ResNetBasicblock(C_prev, C_curr, 2, True)
      else:
        cell = Cell(C_curr)
      self.cells.append(cell)
      C_prev = C_curr

    self._Layer = len(self.cells)
    self.lastact = nn.Sequential(nn.BatchNorm2d(C_prev), nn.ReLU(inplace=True))
    self.global_pooling = nn.AdaptiveAvgPool2d(1)
    self.classifier = nn.Linear(C_prev, num_classes)

  def get_training_config(self):
    optimizer = torch.optim.SGD(
      self.parameters(), lr=0.1, momentum=0.9,
      weight_decay=5e-4, nesterov=True
    )
    scheduler = torch.optim.lr_scheduler.CosineAnnealingLR(optimizer, T_max=200, eta_min=0)
    config = {
      'optimizer': optimizer, 'scheduler': scheduler,
      'batch_size': 256, 'epochs': 200
    }
    return config

  def forward(self, inputs):
    feature = self.stem(inputs)
    for i, cell in enumerate(self.cells):
      feature = cell(feature)
    out = self.lastact(feature)
    out = self.global_pooling(out)
    out = out.view(out.size(0), -1)
    logits = self.classifier(out)
    return out, logits
)";

inline constexpr std::string_view kCommentTemplate =
    R"(Task: {task} image classification ({classes} classes, {height}x{width} {color} images).

This Cell is one building block within a larger neural network.
Full architecture:
- Stem layer: Conv2d({in_channels} channels -> {stem_channels} channels, 3x3 kernel) + BatchNorm2d.
- Main head: stacks {total_cells} copies of the Cell into a sequence. 1 ResNetBasicblock layer is inserted every {cells_per_stage} Cells (total 2).
- Final layers: BatchNorm2d + ReLU + Global Average Pooling + Linear layer to {classes} classes.

Helpers:
- ReLUConvBN: Sequential ReLU -> Conv -> BatchNorm (pre-activation)
- ResNetBasicblock: Residual block with 2 ReLUConvBN plus 1 skip connection with input downsampling

Training Details: SGD optimizer with momentum=0.9, weight_decay=5e-4, initial learning_rate=0.1
with cosine annealing schedule over 200 epochs, batch_size=256, plus standard data augmentation.
)";

}  // namespace cole::codegen::templates
