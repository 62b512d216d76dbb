//! Small hand-built sentences shared by tests and examples.

/// "El ingeniero alemán es muy experto", rooted at the noun.
pub const EL_INGENIERO: &str = "# sent_id = el_ingeniero
# text = El ingeniero alemán es muy experto
1\tEl\tel\tDET\t_\tGender=Masc|Number=Sing\t2\tdet\t_\t_
2\tingeniero\tingeniero\tNOUN\t_\tGender=Masc|Number=Sing\t0\troot\t_\t_
3\talemán\talemán\tADJ\t_\tGender=Masc|Number=Sing\t2\tamod\t_\t_
4\tes\tser\tVERB\t_\tNumber=Sing\t2\tcop\t_\t_
5\tmuy\tmuy\tADV\t_\t_\t6\tadvmod\t_\t_
6\texperto\texperto\tADJ\t_\tGender=Masc|Number=Sing\t2\tamod\t_\t_

";

/// "Los ingenieros son expertos" in UD copula analysis.
pub const LOS_INGENIEROS: &str = "# sent_id = los_ingenieros
# text = Los ingenieros son expertos
1\tLos\tel\tDET\t_\tDefinite=Def|Gender=Masc|Number=Plur|PronType=Art\t2\tdet\t_\t_
2\tingenieros\tingeniero\tNOUN\t_\tGender=Masc|Number=Plur\t4\tnsubj\t_\t_
3\tson\tser\tAUX\t_\tMood=Ind|Number=Plur|Person=3|Tense=Pres|VerbForm=Fin\t4\tcop\t_\t_
4\texpertos\texperto\tADJ\t_\tGender=Masc|Number=Plur\t0\troot\t_\t_

";
