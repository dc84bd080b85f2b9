"""Dimensions of the two reference gap sequences.

For a_n = 1/(n(n+1)) the tails are x_n = 1/n and the dyadic averages are
s_k = 4**-k, so every Cantor-side dimension of C_a equals 1/2.  The middle
third sequence has s_k = 3**-k and gives log 2 / log 3 throughout.  The
countable set D_a behaves differently: its box dimension is 1/2 but its
intermediate dimensions drop towards 0 as theta does.
"""

from compdim import DyadicBlockGeometric, PowerLawTelescoping, dimcalc


def show(name, seq):
    lo, up, a_form = dimcalc.box_dims(seq)
    A, L = dimcalc.assouad_pair(seq)
    print(f"\n{name}")
    print(f"  box dimension        [{lo.value:.5f}, {up.value:.5f}]   a-form lower {a_form.value:.5f}")
    print(f"  Assouad / lower      {A.value:.5f} / {L.value:.5f}")
    print("  theta   C_a upper   D_a upper")
    for theta in (0.1, 0.25, 0.5, 0.75, 1.0):
        c = dimcalc.interm_cantor_upper(seq, theta).value
        d = dimcalc.interm_countable(seq, theta)[0].value
        print(f"  {theta:5.2f}   {c:9.5f}   {d:9.5f}")


if __name__ == "__main__":
    show("a_n = 1/(n(n+1))", PowerLawTelescoping(2.0))
    show("middle-third sequence", DyadicBlockGeometric(1 / 3))
