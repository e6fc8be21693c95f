"""Three hand-annotated mini-novel fixtures.

The golden component counts live in tests/fixtures/golden_<name>.csv and were
tallied by hand from the documented tagging rules; change either side only
after re-counting on paper.

Casts:
  pp_mini   c1 Elizabeth(F) c2 Darcy(M) c3 Jane(F) c4 Mrs. Bennet(F) c5 Bingley(M)
  monologue c1 Ada(F), alone on stage
  hightown  c1 Clara(F) c2 Henry(M) c3 Mrs. Gray(F) c4 Tom(M) c5 Mr. Quill(?)
"""

from helpers.bundle_builder import BundleBuilder


def build_pp_mini() -> BundleBuilder:
    b = BundleBuilder("pp_mini")

    b.chapter("CHAPTER 1.")
    b.paragraph()
    b.sent("{Mrs. Bennet|c4} <hurried|verb.motion> into the room .")
    b.sent("{She|c4,PRON} <wanted|verb.cognition> news of {Bingley|c5} .")
    b.paragraph()
    with b.quote(speaker=4):
        b.sent("Q[ Have you heard about {Mr. Bingley|c5} ? ]Q")
        b.sent("Q[ {He|c5,PRON} has taken the hall at last . ]Q")
    b.paragraph()
    b.sent("{Elizabeth|c1} <looked|verb.perception> up from her book .")
    with b.quote(speaker=1):
        b.sent("Q[ And what is that to us ? ]Q")
    b.paragraph()
    with b.quote(speaker=4):
        b.sent("Q[ {Mr. Bingley|c5} is rich , my dear . ]Q")
        b.sent("Q[ {Jane|c3} must meet {him|c5,PRON} . ]Q")
    b.paragraph()
    b.sent("{Jane|c3} <smiled|verb.body> in her quiet way .")
    b.sent("{She|c3,PRON} was the beauty of the family .")
    b.sent("{Darcy|c2} <arrived|verb.motion> with {Bingley|c5} the next morning .")
    b.paragraph()
    with b.quote(speaker=2):
        b.sent("Q[ {Miss Bennet|c3} is tolerable , I suppose . ]Q")
        b.sent("Q[ But {Elizabeth|c1} is not handsome enough to tempt {me|c2,PRON} . ]Q")
    b.paragraph()
    b.sent("{Elizabeth|c1} <laughed|verb.body> at this speech .")
    b.sent("{She|c1,PRON} <told|verb.communication> the story to {Jane|c3} afterwards .")

    b.chapter("CHAPTER 2.")
    b.paragraph()
    b.sent("{Mrs. Bennet|c4} was in a flutter of spirits .")
    b.sent("The daughters <listened|verb.perception> to {her|c4,PRON} with patience .")
    b.paragraph()
    with b.quote(speaker=None):
        b.sent("Q[ {Jane|c3} will be happy , surely . ]Q")
    with b.quote(speaker=1):
        b.sent("Q[ {Mr. Darcy|c2} is proud , but {he|c2,PRON} is clever . ]Q")
    b.paragraph()
    b.sent("{Darcy|c2} <watched|verb.perception> {Elizabeth|c1} across the room .")
    b.sent("{He|c2,PRON} <found|verb.cognition|find> {her|c1,PRON} face uncommonly intelligent .")
    b.sent("{Elizabeth|c1} wore a plain gown of white muslin .")
    b.paragraph()
    with b.quote(speaker=3):
        b.sent("Q[ {Lizzy|c1} , you must not judge {him|c2,PRON} so quickly . ]Q")
        b.sent("Q[ {He|c2,PRON} may improve . ]Q said {Jane|c3} softly .")
    b.paragraph()
    b.sent("{Mrs. Bennet|c4} <planned|verb.cognition|plan> a dinner for {Bingley|c5} and {Jane|c3} .")
    b.sent("{Bingley|c5} <accepted|verb.social|accept> with delight .")
    b.paragraph()
    with b.quote(speaker=4):
        b.sent("Q[ What an air {he|c5,PRON} has ! ]Q")
        b.sent("Q[ And {his|c5,PRON} friend <stares|verb.perception|stare> at {Lizzy|c1} . ]Q")
    b.paragraph()
    b.sent("{Elizabeth|c1} <blushed|verb.body|blush> .")
    b.sent("{Darcy|c2} <turned|verb.motion|turn> away , and {Elizabeth|c1} <saw|verb.perception|see> {his|c2,PRON} smile .")
    return b


def build_monologue() -> BundleBuilder:
    b = BundleBuilder("monologue")
    b.chapter("CHAPTER 1.")
    b.paragraph()
    b.sent("{Ada|c1} spoke to the empty room .")
    b.paragraph()
    with b.quote(speaker=1):
        b.sent("Q[ They will remember {Ada|c1} . ]Q")
        b.sent("Q[ {I|c1,PRON} have walked these halls for forty years . ]Q")
        b.sent("Q[ No one came to the door . ]Q")
        b.sent("Q[ The clock struck nine . ]Q")
        b.sent("Q[ {I|c1,PRON} counted every chime . ]Q")
        b.sent("Q[ The letters went unanswered . ]Q")
        b.sent("Q[ {Ada|c1} keeps {her|c1,PRON} own counsel . ]Q")
        b.sent("Q[ The garden gate rusted shut . ]Q")
        b.sent("Q[ {I|c1,PRON} did not mind . ]Q")
        b.sent("Q[ Winter came early that year . ]Q")
    b.paragraph()
    b.sent("The room held {her|c1,PRON} words .")
    b.paragraph()
    with b.quote(speaker=1):
        b.sent("Q[ My father built this house . ]Q")
        b.sent("Q[ He planted the elm by the wall . ]Q")
        b.sent("Q[ {I|c1,PRON} watched it grow taller than the roof . ]Q")
        b.sent("Q[ Nothing grows now . ]Q")
        b.sent("Q[ The well ran dry in June . ]Q")
        b.sent("Q[ {Ada|c1} does not complain . ]Q")
        b.sent("Q[ Complaints require listeners . ]Q")
        b.sent("Q[ {I|c1,PRON} have only the walls . ]Q")
    b.paragraph()
    b.sent("Dust settled in the hall .")
    b.paragraph()
    with b.quote(speaker=1):
        b.sent("Q[ Once a peddler knocked . ]Q")
        b.sent("Q[ {I|c1,PRON} sent him away . ]Q")
        b.sent("Q[ He never returned . ]Q")
        b.sent("Q[ The bell hangs silent since . ]Q")
        b.sent("Q[ Silence suits {Ada|c1} . ]Q")
        b.sent("Q[ It asks no questions . ]Q")
        b.sent("Q[ It tells no lies . ]Q")
    b.paragraph()
    b.sent("{Ada|c1} folded the letter again .")
    b.paragraph()
    with b.quote(speaker=1):
        b.sent("Q[ Tomorrow {I|c1,PRON} will write another letter . ]Q")
        b.sent("Q[ It will say what the others said . ]Q")
        b.sent("Q[ That {Ada|c1} remains . ]Q")
        b.sent("Q[ That the house remains . ]Q")
        b.sent("Q[ That nothing else is certain . ]Q")
        b.sent("Q[ The post leaves at noon . ]Q")
        b.sent("Q[ {I|c1,PRON} shall not miss it . ]Q")
    b.paragraph()
    b.sent("The candle burned low .")
    b.sent("{Ada|c1} wrote until dawn .")
    return b


def build_hightown() -> BundleBuilder:
    b = BundleBuilder("hightown")

    b.chapter("CHAPTER 1.")
    b.paragraph()
    b.sent("{Clara|c1} was tall and fair .")
    b.sent("{Her|c1,PRON} dark hair fell in ringlets .")
    b.sent("{Henry|c2} <rode|verb.motion|ride> past the mill .")
    b.sent("{He|c2,PRON} <feared|verb.emotion|fear> the coming storm .")
    b.paragraph()
    b.sent("{Mrs. Gray|c3} <studied|verb.cognition|study> the pair from {her|c3,PRON} window .")
    b.sent("{The vicar|c5,NOM} stood near the gate .")
    b.sent("{Mr. Quill|c5} bowed to {Clara|c1} .")
    b.paragraph()
    with b.quote(speaker=3):
        b.sent("Q[ {Clara|c1} looks pale today . ]Q")
        b.sent("Q[ {Her|c1,PRON} mother would weep at the sight . ]Q")
        b.sent("Q[ And {Henry|c2} rides too fast . ]Q")
    b.paragraph()
    with b.quote(speaker=4):
        b.sent("Q[ {Mrs. Gray|c3} sees everything , {Clara|c1} . ]Q")
        b.sent("Q[ {She|c3,PRON} told {the vicar|c5,NOM} about the dance . ]Q")
    b.paragraph()
    b.sent("{Tom|c4} <laughed|verb.body|laugh> .")
    b.sent("{Clara|c1} <frowned|verb.body|frown> at {him|c4,PRON} .")
    b.sent("{Mrs. Gray|c3} wore a grey silk gown .")
    b.sent("{Henry|c2} <dismounted|verb.motion|dismount> by the well .")
    b.paragraph()
    with b.quote(speaker=2):
        b.sent("Q[ Good morning , {Mrs. Gray|c3} . ]Q")
        b.sent("Q[ Have you seen {Tom|c4} ? ]Q")
    b.paragraph()
    with b.quote(speaker=3):
        b.sent("Q[ {Tom|c4} waits by the mill with {Clara|c1} . ]Q")
        b.sent("Q[ {He|c4,PRON} makes {her|c1,PRON} laugh . ]Q")

    b.chapter("CHAPTER 2.")
    b.paragraph()
    b.sent("{Clara|c1} was pale that evening .")
    b.sent("{Henry|c2} <paced|verb.motion|pace> the hall .")
    b.sent("{He|c2,PRON} <hoped|verb.emotion|hope> for a sign .")
    b.paragraph()
    with b.quote(speaker=1):
        b.sent("Q[ {Henry|c2} thinks too much of {himself|c2,PRON} . ]Q")
        b.sent("Q[ And {Tom|c4} thinks too little . ]Q")
    b.paragraph()
    with b.quote(speaker=4):
        b.sent("Q[ {Clara|c1} , {Clara|c1} , always {Clara|c1} . ]Q")
        b.sent("Q[ {She|c1,PRON} will choose {Henry|c2} in the end . ]Q")
    b.paragraph()
    b.sent("{Mrs. Gray|c3} <watched|verb.perception|watch> the lane .")
    b.sent("{Tom|c4} <kicked|verb.contact|kick> a stone down the path .")
    b.sent("{His|c4,PRON} coat was patched at the elbows .")
    b.sent("{Clara|c1} <pitied|verb.emotion|pity> {him|c4,PRON} .")
    b.paragraph()
    with b.quote(speaker=3):
        b.sent("Q[ The girl has {her|c1,PRON} mother's eyes . ]Q")
        b.sent("Q[ {Henry|c2} will ask for {her|c1,PRON} before the harvest . ]Q")
        b.sent("Q[ {Mr. Quill|c5} will read the banns . ]Q")
    b.paragraph()
    with b.quote(speaker=2):
        b.sent("Q[ You see far , {Mrs. Gray|c3} . ]Q")
    b.paragraph()
    b.sent("{Henry|c2} <smiled|verb.body|smile> and <went|verb.motion|go> in .")
    b.sent("{Clara|c1} <saw|verb.perception|see> {him|c2,PRON} from the stair .")
    b.sent("{Mrs. Gray|c3} <noted|verb.cognition|note> it all in {her|c3,PRON} book .")
    b.sent("The vicar's bell rang across the town .")
    b.sent("{Tom|c4} <walked|verb.motion|walk> home alone .")
    return b


FIXTURE_BUILDERS = {
    "pp_mini": build_pp_mini,
    "monologue": build_monologue,
    "hightown": build_hightown,
}
