"""Central finite differences as an independent gradient oracle."""
import numpy as np
import torch

from evsr import nn


def fd_grads(net, loss_fn, h=1e-5):
    """Gradients of ``loss_fn()`` w.r.t. every parameter by central differences."""
    out = []
    with torch.no_grad():
        for p in net.params:
            flat = p.view(-1)
            g = torch.zeros_like(flat)
            for i in range(flat.numel()):
                orig = flat[i].item()
                flat[i] = orig + h
                fp = loss_fn().item()
                flat[i] = orig - h
                fm = loss_fn().item()
                flat[i] = orig
                g[i] = (fp - fm) / (2 * h)
            out.append(g.view_as(p))
    return out


def max_rel_error(net, loss_fn, h=1e-5):
    analytic = nn.backward(net, loss_fn())
    numeric = fd_grads(net, loss_fn, h)
    a = torch.cat([g.reshape(-1) for g in analytic]).numpy()
    n = torch.cat([g.reshape(-1) for g in numeric]).numpy()
    return float(np.linalg.norm(a - n) / max(np.linalg.norm(a) + np.linalg.norm(n), 1e-300))



def mlp_fd_grads(net, x, loss_of_output, h=1e-5, chunk=4096):
    """Central differences for a Dense/ReLU stack, re-running only downstream layers.

    Perturbing W[r, c] of one layer shifts that layer's pre-activation column r
    by h * input[:, c]; everything upstream is unchanged and reused. The
    forward pass here is written out independently of the network class.
    """
    from torch.func import vmap

    dense = list(zip(net.weights, net.biases))
    batched_loss = vmap(loss_of_output)

    def downstream(z, k):
        for W, b in dense[k + 1:]:
            z = torch.relu(z) @ W.T + b
        return z

    out = []
    with torch.no_grad():
        a = x
        for k, (W, b) in enumerate(dense):
            z = a @ W.T + b
            n_in = W.shape[1]
            cases = (
                (W.shape, torch.arange(W.numel()) // n_in, lambda sel, a=a: a[:, sel % n_in].T),
                (b.shape, torch.arange(b.numel()), lambda sel, a=a: torch.ones(len(sel), len(a), dtype=a.dtype)),
            )
            for shape, rows, shift in cases:
                n = rows.numel()
                g = torch.empty(n, dtype=z.dtype)
                for start in range(0, n, chunk):
                    sel = torch.arange(start, min(n, start + chunk))
                    at, r, d = torch.arange(len(sel)), rows[sel], shift(sel)
                    zp = z.expand(len(sel), *z.shape).clone()
                    zp[at, :, r] += h * d
                    fp = batched_loss(downstream(zp, k))
                    zp[at, :, r] -= 2 * h * d
                    fm = batched_loss(downstream(zp, k))
                    g[sel] = (fp - fm) / (2 * h)
                out.append(g.view(shape))
            a = torch.relu(z)
    return out
