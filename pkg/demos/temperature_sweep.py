"""How the steady-state response scales with the mean temperature.

At high temperature the mean occupation of the slow mode grows like Tbar.
Phi11 follows it linearly. The quoted closed form of Phi12 carries a
factor (nbar - 1)(2 nbar + 1) and so grows like Tbar^2, which makes the
total response change sign. Closing the generator exactly gives a Phi12
that is only linear in Tbar and keeps the sign. Both are shown.
"""
import numpy as np

from lgks_response.models import oscillator_reference, preset

base = preset("fig2-deskscale")
print(f"{'Tbar':>8} {'Phi11':>12} {'Phi12 (n-1)':>14} {'total':>12} {'Phi12 exact':>12} {'total':>12}")
for Tbar in np.geomspace(5, 5e4, 13):
    p = base.with_(Ta=Tbar - 0.5, Tb=Tbar + 0.5)
    P11 = oscillator_reference("Phi11_inf", p)
    P12 = oscillator_reference("Phi12_inf", p)
    Pc = oscillator_reference("Phi12_inf_closure", p)
    print(f"{Tbar:8.1f} {P11:12.5g} {P12:14.5g} {P11 + P12:12.5g} {Pc:12.5g} {P11 + Pc:12.5g}")
