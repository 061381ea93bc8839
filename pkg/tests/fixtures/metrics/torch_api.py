import torch


def step(loss):
    value = loss.data[0]
    torch.manual_seed(0)
    x = torch.zeros(3)
    return value + x
