class ReLU_Conv2d_BatchNorm(nn.Module):
  def __init__(self, channels, kernel_size, stride, padding):
    super().__init__()
    self.op = nn.Sequential(
      nn.ReLU(inplace=False),
      nn.Conv2d(channels, channels, kernel_size, stride=stride, padding=padding, bias=False),
      nn.BatchNorm2d(channels)
    )
  def forward(self, x):
    return self.op(x)

class Cell(nn.Module):
  def __init__(self, channels):
    super().__init__()
    self.op_0_1 = nn.AvgPool2d(kernel_size=3, stride=1, padding=1)
    self.op_0_2 = ReLU_Conv2d_BatchNorm(channels, kernel_size=1, stride=1, padding=0)
    self.op_0_3 = ReLU_Conv2d_BatchNorm(channels, kernel_size=1, stride=1, padding=0)
  def forward(self, x):
    node_0 = x
    node_1 = self.op_0_1(node_0)
    node_2 = self.op_0_2(node_0) + node_1
    node_3 = self.op_0_3(node_0) + node_1 + node_2
    return node_3
