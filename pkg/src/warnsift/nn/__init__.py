"""Neural model: parameters, forward/backward passes, loss, optimizer."""
